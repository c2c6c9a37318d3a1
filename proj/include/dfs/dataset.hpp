#pragma once

#include "dfs/types.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace dfs {

enum class Split : std::uint8_t { kTrain = 0, kTest = 1 };

// Read interface over a GZSL dataset. Training code only touches data through
// this interface, which lets tests substitute an access-logging double.
class DatasetAccess {
 public:
  virtual ~DatasetAccess() = default;

  virtual std::size_t num_samples() const = 0;
  virtual std::size_t num_classes() const = 0;
  virtual std::size_t visual_dim() const = 0;
  virtual std::size_t semantic_dim() const = 0;
  virtual int label(std::size_t sample) const = 0;
  virtual Split split(std::size_t sample) const = 0;
  virtual Vector visual(std::size_t sample) const = 0;
  virtual Vector semantic(int class_id) const = 0;
  virtual const std::vector<int>& seen_classes() const = 0;
  virtual const std::vector<int>& unseen_classes() const = 0;
};

bool is_seen(const DatasetAccess& data, int class_id);
bool is_unseen(const DatasetAccess& data, int class_id);
// TRAIN samples, in index order.
std::vector<std::size_t> train_indices(const DatasetAccess& data);
// TEST samples, in index order.
std::vector<std::size_t> test_indices(const DatasetAccess& data);
// TRAIN samples grouped by seen class (class-ascending).
std::vector<std::pair<int, std::vector<std::size_t>>> train_indices_by_class(
    const DatasetAccess& data);
Matrix gather_visual(const DatasetAccess& data, const std::vector<std::size_t>& samples);
Matrix gather_semantic(const DatasetAccess& data, const std::vector<int>& class_ids);

// In-memory dataset. Invariants (checked by validate()):
//  - seen and unseen class sets are disjoint and cover only ids < num_classes;
//  - every TRAIN sample is labelled with a seen class;
//  - all values are finite.
class FeatureDataset : public DatasetAccess {
 public:
  RowMatrix visual_features;    // N x Dv
  std::vector<int> labels;      // N
  RowMatrix semantic_features;  // C x Da
  std::vector<int> seen;
  std::vector<int> unseen;
  std::vector<Split> splits;    // N

  void validate() const;

  std::size_t num_samples() const override { return labels.size(); }
  std::size_t num_classes() const override {
    return static_cast<std::size_t>(semantic_features.rows());
  }
  std::size_t visual_dim() const override {
    return static_cast<std::size_t>(visual_features.cols());
  }
  std::size_t semantic_dim() const override {
    return static_cast<std::size_t>(semantic_features.cols());
  }
  int label(std::size_t sample) const override { return labels.at(sample); }
  Split split(std::size_t sample) const override { return splits.at(sample); }
  Vector visual(std::size_t sample) const override;
  Vector semantic(int class_id) const override;
  const std::vector<int>& seen_classes() const override { return seen; }
  const std::vector<int>& unseen_classes() const override { return unseen; }

  bool operator==(const FeatureDataset& other) const;
};

// Writes the manifest plus one float32 blob per matrix next to it.
void save_dataset(const FeatureDataset& data, const std::filesystem::path& manifest_path);
// Loads and validates. Distinct error codes: kShapeMismatch, kClassOverlap,
// kLeakage, kNonFinite, kLabelRange, kTruncated, kFormat, kVersionMismatch.
FeatureDataset load_dataset(const std::filesystem::path& manifest_path);

}  // namespace dfs
