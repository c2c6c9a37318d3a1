#include "dfs/dataset.hpp"

#include "dfs/blob_io.hpp"
#include "dfs/error.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>

namespace dfs {

namespace fs = std::filesystem;

bool is_seen(const DatasetAccess& data, int class_id) {
  const auto& s = data.seen_classes();
  return std::find(s.begin(), s.end(), class_id) != s.end();
}

bool is_unseen(const DatasetAccess& data, int class_id) {
  const auto& u = data.unseen_classes();
  return std::find(u.begin(), u.end(), class_id) != u.end();
}

std::vector<std::size_t> train_indices(const DatasetAccess& data) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < data.num_samples(); ++i)
    if (data.split(i) == Split::kTrain) out.push_back(i);
  return out;
}

std::vector<std::size_t> test_indices(const DatasetAccess& data) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < data.num_samples(); ++i)
    if (data.split(i) == Split::kTest) out.push_back(i);
  return out;
}

std::vector<std::pair<int, std::vector<std::size_t>>> train_indices_by_class(
    const DatasetAccess& data) {
  std::map<int, std::vector<std::size_t>> by_class;
  for (int c : data.seen_classes()) by_class[c];
  for (std::size_t i : train_indices(data)) by_class[data.label(i)].push_back(i);
  return {by_class.begin(), by_class.end()};
}

Matrix gather_visual(const DatasetAccess& data, const std::vector<std::size_t>& samples) {
  Matrix out(static_cast<Eigen::Index>(samples.size()), static_cast<Eigen::Index>(data.visual_dim()));
  for (std::size_t r = 0; r < samples.size(); ++r)
    out.row(static_cast<Eigen::Index>(r)) = data.visual(samples[r]).transpose();
  return out;
}

Matrix gather_semantic(const DatasetAccess& data, const std::vector<int>& class_ids) {
  Matrix out(static_cast<Eigen::Index>(class_ids.size()),
             static_cast<Eigen::Index>(data.semantic_dim()));
  for (std::size_t r = 0; r < class_ids.size(); ++r)
    out.row(static_cast<Eigen::Index>(r)) = data.semantic(class_ids[r]).transpose();
  return out;
}

Vector FeatureDataset::visual(std::size_t sample) const {
  require(sample < labels.size(), ErrorCode::kInvalidArgument, "sample index out of range");
  return visual_features.row(static_cast<Eigen::Index>(sample)).transpose();
}

Vector FeatureDataset::semantic(int class_id) const {
  require(class_id >= 0 && class_id < semantic_features.rows(), ErrorCode::kLabelRange,
          "no semantic embedding for class " + std::to_string(class_id));
  return semantic_features.row(class_id).transpose();
}

void FeatureDataset::validate() const {
  const auto n = static_cast<Eigen::Index>(labels.size());
  if (visual_features.rows() != n || splits.size() != labels.size())
    fail(ErrorCode::kShapeMismatch, "visual, labels and split disagree on the sample count");
  require(semantic_features.rows() > 0, ErrorCode::kShapeMismatch, "no semantic embeddings");
  require(!visual_features.size() || visual_features.allFinite(), ErrorCode::kNonFinite,
          "visual features contain NaN or Inf");
  require(semantic_features.allFinite(), ErrorCode::kNonFinite,
          "semantic embeddings contain NaN or Inf");

  const int num_classes = static_cast<int>(semantic_features.rows());
  std::set<int> seen_set, unseen_set;
  for (int c : seen) {
    require(c >= 0 && c < num_classes, ErrorCode::kLabelRange,
            "seen class id " + std::to_string(c) + " out of range");
    require(seen_set.insert(c).second, ErrorCode::kFormat, "duplicate seen class id");
  }
  for (int c : unseen) {
    require(c >= 0 && c < num_classes, ErrorCode::kLabelRange,
            "unseen class id " + std::to_string(c) + " out of range");
    require(unseen_set.insert(c).second, ErrorCode::kFormat, "duplicate unseen class id");
    if (seen_set.count(c))
      fail(ErrorCode::kClassOverlap, "class " + std::to_string(c) + " is both seen and unseen");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int l = labels[i];
    require(l >= 0 && l < num_classes, ErrorCode::kLabelRange,
            "sample " + std::to_string(i) + " has label " + std::to_string(l));
    if (splits[i] == Split::kTrain && !seen_set.count(l))
      fail(ErrorCode::kLeakage, "TRAIN sample " + std::to_string(i) + " is labelled with class " +
                                    std::to_string(l) + ", which is not a seen class");
  }
}

bool FeatureDataset::operator==(const FeatureDataset& o) const {
  return visual_features == o.visual_features && labels == o.labels &&
         semantic_features == o.semantic_features && seen == o.seen && unseen == o.unseen &&
         splits == o.splits;
}

void save_dataset(const FeatureDataset& data, const fs::path& manifest_path) {
  data.validate();
  Manifest m;
  m.set("format_version", std::to_string(kFormatVersion));
  m.set("kind", "feature_dataset");
  m.set("num_samples", std::to_string(data.num_samples()));
  m.set("num_classes", std::to_string(data.num_classes()));
  m.set("visual_dim", std::to_string(data.visual_dim()));
  m.set("semantic_dim", std::to_string(data.semantic_dim()));
  std::vector<int> split_codes;
  for (Split s : data.splits) split_codes.push_back(static_cast<int>(s));
  store_blob(m, manifest_path, "visual", data.visual_features);
  store_blob(m, manifest_path, "semantic", data.semantic_features);
  store_blob(m, manifest_path, "labels", column_of(data.labels));
  store_blob(m, manifest_path, "split", column_of(split_codes));
  store_blob(m, manifest_path, "seen_ids", column_of(data.seen));
  store_blob(m, manifest_path, "unseen_ids", column_of(data.unseen));
  m.write(manifest_path);
}

FeatureDataset load_dataset(const fs::path& manifest_path) {
  const Manifest m = Manifest::read(manifest_path);
  m.expect("feature_dataset");
  const std::size_t n = m.get_size("num_samples");
  const std::size_t c = m.get_size("num_classes");
  const std::size_t dv = m.get_size("visual_dim");
  const std::size_t da = m.get_size("semantic_dim");

  FeatureDataset d;
  d.visual_features = load_blob(m, manifest_path, "visual", n, dv);
  d.semantic_features = load_blob(m, manifest_path, "semantic", c, da);
  d.labels = ints_of(load_blob(m, manifest_path, "labels", n, 1), "labels");
  for (int s : ints_of(load_blob(m, manifest_path, "split", n, 1), "split")) {
    require(s == 0 || s == 1, ErrorCode::kFormat, "split codes must be 0 (TRAIN) or 1 (TEST)");
    d.splits.push_back(static_cast<Split>(s));
  }
  d.seen = ints_of(load_blob(m, manifest_path, "seen_ids", 0, 1), "seen_ids");
  d.unseen = ints_of(load_blob(m, manifest_path, "unseen_ids", 0, 1), "unseen_ids");
  d.validate();
  return d;
}

}  // namespace dfs
