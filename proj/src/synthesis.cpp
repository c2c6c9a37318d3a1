#include "dfs/synthesis.hpp"

#include "dfs/blob_io.hpp"
#include "dfs/error.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace dfs {

namespace {

// Sub-stream per (purpose, class) so classes can be synthesized independently.
constexpr std::uint64_t kSeenStream = 1;
constexpr std::uint64_t kUnseenStream = 2;
constexpr std::uint64_t kBaselineStream = 3;

RngStream class_stream(std::uint64_t seed, std::uint64_t purpose, int class_id) {
  return RngStream::derive(seed, purpose * 1000003ULL + static_cast<std::uint64_t>(class_id));
}

void append(SynthesizedSet& set, const Matrix& rows, int label, Provenance p) {
  const Eigen::Index old = set.features.rows();
  if (old == 0) set.features.resize(0, rows.cols());
  set.features.conservativeResize(old + rows.rows(), rows.cols());
  set.features.bottomRows(rows.rows()) = rows;
  set.labels.insert(set.labels.end(), static_cast<std::size_t>(rows.rows()), label);
  set.provenance.insert(set.provenance.end(), static_cast<std::size_t>(rows.rows()), p);
}

std::vector<int> sorted(std::vector<int> ids) {
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace

void SynthesisPlan::validate() const {
  require(per_seen_class_count >= 1 && per_unseen_class_count >= 1, ErrorCode::kInvalidArgument,
          "synthesis counts must be at least 1");
}

void SynthesizedSet::validate() const {
  require(static_cast<std::size_t>(features.rows()) == labels.size() &&
              labels.size() == provenance.size(),
          ErrorCode::kShapeMismatch, "synthesized set rows, labels and provenance disagree");
  for (int l : labels) require(l >= 0, ErrorCode::kLabelRange, "negative label in synthesized set");
}

SynthesizedSet synthesize_seen(const AfgModel& afg, const DatasetAccess& data,
                               const SynthesisPlan& plan) {
  plan.validate();
  SynthesizedSet out;
  out.features.resize(0, static_cast<Eigen::Index>(afg.aligned_dim()));
  for (const auto& [cls, samples] : train_indices_by_class(data)) {
    if (samples.empty())
      fail(ErrorCode::kInvalidArgument,
           "seen class " + std::to_string(cls) + " has no TRAIN visual features");
    const GaussianBatch post = afg.encode_visual(gather_visual(data, samples));
    if (plan.seen_source == SeenSource::kEncodedMean) {
      append(out, post.mean, cls, Provenance::kSeenPosterior);
      continue;
    }
    RngStream rng = class_stream(plan.seed, kSeenStream, cls);
    const auto n = static_cast<Eigen::Index>(plan.per_seen_class_count);
    GaussianBatch picked{Matrix(n, post.dim()), Matrix(n, post.dim())};
    for (Eigen::Index r = 0; r < n; ++r) {
      const auto src = static_cast<Eigen::Index>(rng.index(samples.size()));
      picked.mean.row(r) = post.mean.row(src);
      picked.log_var.row(r) = post.log_var.row(src);
    }
    append(out, reparameterize(picked, rng.normal_matrix(n, post.dim())), cls,
           Provenance::kSeenPosterior);
  }
  return out;
}

SynthesizedSet synthesize_unseen(const AfgModel& afg, const SfgModel& sfg,
                                 const DatasetAccess& data, const SynthesisPlan& plan) {
  plan.validate();
  require(sfg.aligned_dim() == afg.aligned_dim(), ErrorCode::kDimensionMismatch,
          "SFG and AFG aligned dimensions differ");
  SynthesizedSet out;
  out.features.resize(0, static_cast<Eigen::Index>(afg.aligned_dim()));
  const auto n = static_cast<Eigen::Index>(plan.per_unseen_class_count);
  for (int cls : sorted(data.unseen_classes())) {
    RngStream rng = class_stream(plan.seed, kUnseenStream, cls);
    const Vector a = data.semantic(cls);
    const Matrix a_rows = a.transpose().replicate(n, 1);
    const Matrix cond = condition_rows(afg, a_rows, sfg.condition_mode(), rng);
    require(static_cast<std::size_t>(cond.cols()) == sfg.condition_dim(),
            ErrorCode::kDimensionMismatch, "condition width does not match D3");
    const Matrix noise = rng.normal_matrix(n, static_cast<Eigen::Index>(sfg.latent_dim()));
    append(out, sfg.decode(noise, cond), cls, Provenance::kUnseenDecoded);
  }
  return out;
}

SynthesizedSet synthesize_unseen_baseline(const AfgModel& afg, const DatasetAccess& data,
                                          const SynthesisPlan& plan) {
  plan.validate();
  SynthesizedSet out;
  out.features.resize(0, static_cast<Eigen::Index>(afg.aligned_dim()));
  const auto n = static_cast<Eigen::Index>(plan.per_unseen_class_count);
  for (int cls : sorted(data.unseen_classes())) {
    RngStream rng = class_stream(plan.seed, kBaselineStream, cls);
    const GaussianBatch g = afg.encode_semantic(Matrix(data.semantic(cls).transpose()));
    const GaussianBatch rows{g.mean.replicate(n, 1), g.log_var.replicate(n, 1)};
    append(out, reparameterize(rows, rng.normal_matrix(n, g.dim())), cls,
           Provenance::kUnseenSemanticPosterior);
  }
  return out;
}

std::map<int, double> diversity_score(const SynthesizedSet& set) {
  set.validate();
  std::map<int, std::vector<Eigen::Index>> rows_by_class;
  for (std::size_t i = 0; i < set.labels.size(); ++i)
    rows_by_class[set.labels[i]].push_back(static_cast<Eigen::Index>(i));
  std::map<int, double> out;
  for (const auto& [cls, rows] : rows_by_class) {
    if (rows.size() < 2)
      fail(ErrorCode::kInvalidArgument,
           "diversity needs at least two rows for class " + std::to_string(cls));
    Matrix x(static_cast<Eigen::Index>(rows.size()), set.features.cols());
    for (std::size_t r = 0; r < rows.size(); ++r)
      x.row(static_cast<Eigen::Index>(r)) = set.features.row(rows[r]);
    const Matrix centered = x.rowwise() - x.colwise().mean();
    out[cls] = centered.squaredNorm() / static_cast<double>(rows.size() - 1);
  }
  return out;
}

double mean_score(const std::map<int, double>& scores) {
  if (scores.empty()) return 0.0;
  double s = 0.0;
  for (const auto& [cls, v] : scores) s += v;
  return s / static_cast<double>(scores.size());
}

SynthesizedSet build_classifier_trainset(const SynthesizedSet& seen, const SynthesizedSet& unseen) {
  seen.validate();
  unseen.validate();
  if (seen.size() > 0 && unseen.size() > 0)
    require(seen.dim() == unseen.dim(), ErrorCode::kDimensionMismatch,
            "seen and unseen synthesized sets have different widths");
  const Eigen::Index dim =
      seen.size() > 0 ? seen.features.cols() : unseen.features.cols();
  SynthesizedSet out;
  out.features.resize(static_cast<Eigen::Index>(seen.size() + unseen.size()), dim);
  Eigen::Index row = 0;
  for (const SynthesizedSet* block : {&seen, &unseen}) {
    std::vector<std::size_t> order(block->size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return block->labels[a] < block->labels[b]; });
    for (std::size_t i : order) {
      out.features.row(row++) = block->features.row(static_cast<Eigen::Index>(i));
      out.labels.push_back(block->labels[i]);
      out.provenance.push_back(block->provenance[i]);
    }
  }
  return out;
}

void save_synthesized(const SynthesizedSet& set, const std::filesystem::path& manifest_path) {
  set.validate();
  Manifest m;
  m.set("format_version", std::to_string(kFormatVersion));
  m.set("kind", "synthesized_set");
  m.set("num_samples", std::to_string(set.size()));
  m.set("dim", std::to_string(set.dim()));
  std::vector<int> prov;
  for (Provenance p : set.provenance) prov.push_back(static_cast<int>(p));
  store_blob(m, manifest_path, "features", RowMatrix(set.features));
  store_blob(m, manifest_path, "labels", column_of(set.labels));
  store_blob(m, manifest_path, "provenance", column_of(prov));
  m.write(manifest_path);
}

SynthesizedSet load_synthesized(const std::filesystem::path& manifest_path) {
  const Manifest m = Manifest::read(manifest_path);
  m.expect("synthesized_set");
  const std::size_t n = m.get_size("num_samples");
  const std::size_t d = m.get_size("dim");
  SynthesizedSet set;
  set.features = load_blob(m, manifest_path, "features", n, d);
  set.labels = ints_of(load_blob(m, manifest_path, "labels", n, 1), "labels");
  for (int p : ints_of(load_blob(m, manifest_path, "provenance", n, 1), "provenance")) {
    require(p >= 0 && p <= 2, ErrorCode::kFormat, "unknown provenance code");
    set.provenance.push_back(static_cast<Provenance>(p));
  }
  set.validate();
  return set;
}

}  // namespace dfs
