#pragma once

#include "dfs/afg.hpp"
#include "dfs/dataset.hpp"
#include "dfs/mlp.hpp"
#include "dfs/optim.hpp"
#include "dfs/synthesis.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace dfs {

struct ClassifierConfig {
  int epochs = 200;
  double learning_rate = 1e-3;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;

  void validate() const;
};

// Softmax-regression classifier over the aligned space.
class LinearClassifier {
 public:
  LinearClassifier() = default;
  LinearClassifier(MlpNet net, std::vector<int> class_ids);

  const MlpNet& net() const { return net_; }
  const std::vector<int>& class_ids() const { return class_ids_; }
  std::size_t dim() const { return net_.input_dim(); }

  Matrix logits(const Matrix& features) const;
  // Argmax class id per row; ties go to the lowest class id.
  std::vector<int> predict(const Matrix& features) const;

 private:
  MlpNet net_;
  std::vector<int> class_ids_;  // ascending; row k of the weight matrix
};

// Minimizes mean softmax cross-entropy with the adaptive-moment optimizer.
// Throws kInvalidArgument when fewer than two classes are present.
LinearClassifier train_linear_classifier(const SynthesizedSet& trainset,
                                         const ClassifierConfig& config);

struct ClassAccuracy {
  double mean = 0.0;
  std::map<int, double> per_class;
};

// Accuracy of each class in class_subset over its own samples, and the
// unweighted mean over classes.
ClassAccuracy per_class_accuracy(const std::vector<int>& predicted, const std::vector<int>& truth,
                                 const std::vector<int>& class_subset);
ClassAccuracy per_class_accuracy(const LinearClassifier& clf, const Matrix& features,
                                 const std::vector<int>& labels,
                                 const std::vector<int>& class_subset);

// 2 s u / (s + u), and 0 when both are 0.
double harmonic_mean(double acc_s, double acc_u);

struct EvalReport {
  double acc_s = 0.0;
  double acc_u = 0.0;
  double acc_h = 0.0;
  std::vector<int> seen_classes;
  std::vector<int> unseen_classes;
  std::map<int, double> per_class_accuracy;
  std::map<int, std::size_t> per_class_count;
  std::map<int, double> diversity;  // synthesized training rows, per class
  std::string generator;
  std::string config_fingerprint;
};

EvalReport assemble_report(const std::vector<int>& predicted, const std::vector<int>& truth,
                           const std::vector<int>& seen, const std::vector<int>& unseen);

// Test features enter the aligned space as the mean of E2's posterior.
EvalReport evaluate_gzsl(const LinearClassifier& clf, const AfgModel& afg,
                         const Matrix& test_visual, const std::vector<int>& test_labels,
                         const std::vector<int>& seen, const std::vector<int>& unseen);
// Uses every TEST sample of the dataset.
EvalReport evaluate_gzsl(const LinearClassifier& clf, const AfgModel& afg,
                         const DatasetAccess& data);

// key=value lines, and a per-class CSV table with a header row.
void write_report(const EvalReport& report, const std::filesystem::path& kv_path,
                  const std::filesystem::path& csv_path);
std::map<std::string, std::string> read_report_values(const std::filesystem::path& kv_path);

}  // namespace dfs
