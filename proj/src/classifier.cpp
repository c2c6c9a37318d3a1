#include "dfs/classifier.hpp"

#include "dfs/error.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <set>

namespace dfs {

namespace {

constexpr std::uint64_t kClassifierStream = 30;

}  // namespace

void ClassifierConfig::validate() const {
  require(epochs >= 0, ErrorCode::kInvalidArgument, "classifier epochs must be non-negative");
  require(learning_rate > 0.0, ErrorCode::kInvalidArgument, "classifier learning rate must be positive");
  require(batch_size >= 1, ErrorCode::kInvalidArgument, "classifier batch size must be at least 1");
}

LinearClassifier::LinearClassifier(MlpNet net, std::vector<int> class_ids)
    : net_(std::move(net)), class_ids_(std::move(class_ids)) {
  require(net_.num_layers() == 1, ErrorCode::kInvalidArgument, "a linear classifier has one layer");
  require(net_.output_dim() == class_ids_.size(), ErrorCode::kDimensionMismatch,
          "classifier outputs and class ids disagree");
  require(std::is_sorted(class_ids_.begin(), class_ids_.end()) &&
              std::adjacent_find(class_ids_.begin(), class_ids_.end()) == class_ids_.end(),
          ErrorCode::kInvalidArgument, "class ids must be ascending and unique");
}

Matrix LinearClassifier::logits(const Matrix& features) const { return net_.forward(features); }

std::vector<int> LinearClassifier::predict(const Matrix& features) const {
  const Matrix z = logits(features);
  std::vector<int> out(static_cast<std::size_t>(z.rows()));
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < z.cols(); ++k)
      if (z(i, k) > z(i, best)) best = k;
    out[static_cast<std::size_t>(i)] = class_ids_[static_cast<std::size_t>(best)];
  }
  return out;
}

LinearClassifier train_linear_classifier(const SynthesizedSet& trainset,
                                         const ClassifierConfig& config) {
  config.validate();
  trainset.validate();
  const std::set<int> unique(trainset.labels.begin(), trainset.labels.end());
  require(unique.size() >= 2, ErrorCode::kInvalidArgument,
          "classifier training needs at least two classes");
  std::vector<int> class_ids(unique.begin(), unique.end());
  std::vector<Eigen::Index> target(trainset.size());
  for (std::size_t i = 0; i < trainset.size(); ++i)
    target[i] = std::lower_bound(class_ids.begin(), class_ids.end(), trainset.labels[i]) -
                class_ids.begin();

  RngStream rng = RngStream::derive(config.seed, kClassifierStream);
  MlpNet net = MlpNet::uniform_init({trainset.dim(), class_ids.size()}, rng);
  OptimState optim(AdamConfig{config.learning_rate});
  MlpGradients grads(net);
  const auto params = net.parameter_spans();
  const auto grad_spans = grads.spans();

  std::vector<Eigen::Index> order(trainset.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);
  const auto num_classes = static_cast<Eigen::Index>(class_ids.size());

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const auto b = static_cast<Eigen::Index>(end - start);
      Matrix x(b, trainset.features.cols());
      for (Eigen::Index r = 0; r < b; ++r)
        x.row(r) = trainset.features.row(order[start + static_cast<std::size_t>(r)]);
      ForwardCache cache;
      const Matrix z = net.forward(x, &cache);
      // softmax(z) - onehot, averaged over the batch
      Matrix g(b, num_classes);
      for (Eigen::Index r = 0; r < b; ++r) {
        const double m = z.row(r).maxCoeff();
        const Eigen::RowVectorXd e = (z.row(r).array() - m).exp().matrix();
        g.row(r) = e / e.sum();
        g(r, target[static_cast<std::size_t>(order[start + static_cast<std::size_t>(r)])]) -= 1.0;
      }
      g /= static_cast<double>(b);
      grads.zero();
      net.backward(cache, g, grads);
      optim.step(params, grad_spans);
    }
  }
  net.round_parameters_to_float();
  return LinearClassifier(std::move(net), std::move(class_ids));
}

ClassAccuracy per_class_accuracy(const std::vector<int>& predicted, const std::vector<int>& truth,
                                 const std::vector<int>& class_subset) {
  require(predicted.size() == truth.size(), ErrorCode::kDimensionMismatch,
          "prediction and label counts differ");
  ClassAccuracy out;
  for (int cls : class_subset) {
    std::size_t total = 0, correct = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      if (truth[i] != cls) continue;
      ++total;
      if (predicted[i] == cls) ++correct;
    }
    if (total == 0)
      fail(ErrorCode::kInvalidArgument, "class " + std::to_string(cls) + " has no test samples");
    out.per_class[cls] = static_cast<double>(correct) / static_cast<double>(total);
  }
  double sum = 0.0;
  for (const auto& [cls, acc] : out.per_class) sum += acc;
  out.mean = class_subset.empty() ? 0.0 : sum / static_cast<double>(out.per_class.size());
  return out;
}

ClassAccuracy per_class_accuracy(const LinearClassifier& clf, const Matrix& features,
                                 const std::vector<int>& labels,
                                 const std::vector<int>& class_subset) {
  return per_class_accuracy(clf.predict(features), labels, class_subset);
}

double harmonic_mean(double acc_s, double acc_u) {
  require(acc_s >= 0.0 && acc_s <= 1.0 && acc_u >= 0.0 && acc_u <= 1.0,
          ErrorCode::kInvalidArgument, "accuracies must lie in [0, 1]");
  if (acc_s + acc_u == 0.0) return 0.0;
  return 2.0 * acc_s * acc_u / (acc_s + acc_u);
}

EvalReport assemble_report(const std::vector<int>& predicted, const std::vector<int>& truth,
                           const std::vector<int>& seen, const std::vector<int>& unseen) {
  EvalReport r;
  r.seen_classes = seen;
  r.unseen_classes = unseen;
  std::sort(r.seen_classes.begin(), r.seen_classes.end());
  std::sort(r.unseen_classes.begin(), r.unseen_classes.end());
  const ClassAccuracy s = per_class_accuracy(predicted, truth, r.seen_classes);
  const ClassAccuracy u = per_class_accuracy(predicted, truth, r.unseen_classes);
  r.acc_s = s.mean;
  r.acc_u = u.mean;
  r.acc_h = harmonic_mean(r.acc_s, r.acc_u);
  r.per_class_accuracy = s.per_class;
  r.per_class_accuracy.insert(u.per_class.begin(), u.per_class.end());
  for (int l : truth) ++r.per_class_count[l];
  return r;
}

EvalReport evaluate_gzsl(const LinearClassifier& clf, const AfgModel& afg,
                         const Matrix& test_visual, const std::vector<int>& test_labels,
                         const std::vector<int>& seen, const std::vector<int>& unseen) {
  const auto& ids = clf.class_ids();
  for (int l : test_labels)
    if (!std::binary_search(ids.begin(), ids.end(), l))
      fail(ErrorCode::kLabelRange,
           "test label " + std::to_string(l) + " is not one of the classifier's classes");
  const Matrix aligned = afg.encode_visual(test_visual).mean;
  return assemble_report(clf.predict(aligned), test_labels, seen, unseen);
}

EvalReport evaluate_gzsl(const LinearClassifier& clf, const AfgModel& afg,
                         const DatasetAccess& data) {
  const std::vector<std::size_t> idx = test_indices(data);
  std::vector<int> labels;
  for (std::size_t i : idx) labels.push_back(data.label(i));
  return evaluate_gzsl(clf, afg, gather_visual(data, idx), labels, data.seen_classes(),
                       data.unseen_classes());
}

void write_report(const EvalReport& r, const std::filesystem::path& kv_path,
                  const std::filesystem::path& csv_path) {
  std::ofstream kv(kv_path, std::ios::trunc);
  if (!kv) fail(ErrorCode::kIo, "cannot write " + kv_path.string());
  double unseen_div = 0.0;
  std::size_t n_div = 0;
  for (int c : r.unseen_classes) {
    if (auto it = r.diversity.find(c); it != r.diversity.end()) {
      unseen_div += it->second;
      ++n_div;
    }
  }
  kv << "generator=" << r.generator << '\n'
     << fmt::format("acc_s={:.9f}\nacc_u={:.9f}\nacc_h={:.9f}\n", r.acc_s, r.acc_u, r.acc_h)
     << "num_seen_classes=" << r.seen_classes.size() << '\n'
     << "num_unseen_classes=" << r.unseen_classes.size() << '\n'
     << fmt::format("mean_unseen_diversity={:.9f}\n", n_div ? unseen_div / double(n_div) : 0.0)
     << "config_fingerprint=" << r.config_fingerprint << '\n';
  if (!kv) fail(ErrorCode::kIo, "write failed for " + kv_path.string());

  std::ofstream csv(csv_path, std::ios::trunc);
  if (!csv) fail(ErrorCode::kIo, "cannot write " + csv_path.string());
  csv << "class_id,group,test_samples,accuracy,diversity\n";
  auto row = [&](int c, const char* group) {
    const auto count = r.per_class_count.count(c) ? r.per_class_count.at(c) : 0;
    const auto acc = r.per_class_accuracy.count(c) ? r.per_class_accuracy.at(c) : 0.0;
    csv << c << ',' << group << ',' << count << ',' << fmt::format("{:.9f}", acc) << ',';
    if (auto it = r.diversity.find(c); it != r.diversity.end()) csv << fmt::format("{:.9f}", it->second);
    csv << '\n';
  };
  for (int c : r.seen_classes) row(c, "seen");
  for (int c : r.unseen_classes) row(c, "unseen");
  if (!csv) fail(ErrorCode::kIo, "write failed for " + csv_path.string());
}

std::map<std::string, std::string> read_report_values(const std::filesystem::path& kv_path) {
  std::ifstream in(kv_path);
  if (!in) fail(ErrorCode::kIo, "cannot open " + kv_path.string());
  std::map<std::string, std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    out[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return out;
}

}  // namespace dfs
