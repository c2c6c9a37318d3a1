#include "dfs/benchmark.hpp"

#include "dfs/error.hpp"
#include "dfs/rng.hpp"

#include <algorithm>
#include <cmath>

namespace dfs {

void SyntheticBenchmarkSpec::validate() const {
  require(num_seen >= 1 && num_unseen >= 1, ErrorCode::kInvalidArgument,
          "benchmark needs at least one seen and one unseen class");
  require(visual_dim >= 1 && semantic_dim >= 1 && samples_per_class >= 1,
          ErrorCode::kInvalidArgument, "benchmark dimensions and counts must be positive");
  require(cov_scale > 0.0 && std::isfinite(cov_scale), ErrorCode::kInvalidArgument,
          "covariance scale must be positive");
  require(map_noise >= 0.0 && class_separation > 0.0, ErrorCode::kInvalidArgument,
          "map noise must be non-negative and class separation positive");
  require(spectrum_decay > 0.0 && spectrum_decay <= 1.0, ErrorCode::kInvalidArgument,
          "spectrum decay must lie in (0, 1]");
  require(semantic_rank <= semantic_dim, ErrorCode::kInvalidArgument,
          "semantic rank exceeds the semantic dimension");
  require(test_fraction >= 0.0 && test_fraction < 1.0, ErrorCode::kInvalidArgument,
          "test fraction must lie in [0, 1)");
}

FeatureDataset generate_synthetic_benchmark(const SyntheticBenchmarkSpec& spec,
                                            BenchmarkGroundTruth* truth) {
  spec.validate();
  RngStream rng(spec.seed);
  const auto dv = static_cast<Eigen::Index>(spec.visual_dim);
  const auto da = static_cast<Eigen::Index>(spec.semantic_dim);
  const std::size_t num_classes = spec.num_seen + spec.num_unseen;
  const auto c = static_cast<Eigen::Index>(num_classes);

  std::vector<int> ids(num_classes);
  for (std::size_t i = 0; i < num_classes; ++i) ids[i] = static_cast<int>(i);
  rng.shuffle(ids);
  std::vector<int> seen(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(spec.num_seen));
  std::vector<int> unseen(ids.begin() + static_cast<std::ptrdiff_t>(spec.num_seen), ids.end());
  std::sort(seen.begin(), seen.end());
  std::sort(unseen.begin(), unseen.end());

  const Matrix map = rng.normal_matrix(dv, da) * (spec.class_separation / std::sqrt(double(da)));
  // Shared within-class shape: variance decays geometrically along a random
  // orthonormal basis, normalized to unit average per coordinate.
  const Matrix basis = Eigen::HouseholderQR<Matrix>(rng.normal_matrix(dv, dv)).householderQ();
  Vector spectrum(dv);
  for (Eigen::Index i = 0; i < dv; ++i) spectrum(i) = std::pow(spec.spectrum_decay, double(i));
  spectrum *= double(dv) / spectrum.sum();
  const Matrix mixing = basis * spectrum.cwiseSqrt().asDiagonal();

  FeatureDataset d;
  if (spec.semantic_rank == 0) {
    d.semantic_features = rng.normal_matrix(c, da);
  } else {
    // Correlated attributes: prototypes span a random subspace, unit variance
    // per coordinate.
    const auto k = static_cast<Eigen::Index>(spec.semantic_rank);
    const Matrix factors = rng.normal_matrix(da, k) / std::sqrt(double(k));
    d.semantic_features = rng.normal_matrix(c, k) * factors.transpose();
  }
  round_to_float(d.semantic_features);
  RowMatrix means(c, dv);
  for (Eigen::Index k = 0; k < c; ++k) {
    const Vector a = d.semantic_features.row(k).transpose();
    means.row(k) = (map * a + spec.map_noise * rng.normal_vector(dv)).transpose();
  }
  const Vector scales = Vector::Constant(c, spec.cov_scale);

  const auto n_test_seen = static_cast<std::size_t>(
      std::llround(spec.test_fraction * static_cast<double>(spec.samples_per_class)));
  const std::size_t n_total = num_classes * spec.samples_per_class;
  d.visual_features.resize(static_cast<Eigen::Index>(n_total), dv);
  std::size_t row = 0;
  for (std::size_t k = 0; k < num_classes; ++k) {
    const int cls = static_cast<int>(k);
    const bool unseen_class = std::find(unseen.begin(), unseen.end(), cls) != unseen.end();
    for (std::size_t s = 0; s < spec.samples_per_class; ++s, ++row) {
      const Vector e = rng.normal_vector(dv);
      d.visual_features.row(static_cast<Eigen::Index>(row)) =
          means.row(cls) + (scales(cls) * (mixing * e)).transpose();
      d.labels.push_back(cls);
      const bool test = unseen_class || s >= spec.samples_per_class - n_test_seen;
      d.splits.push_back(test ? Split::kTest : Split::kTrain);
    }
  }
  round_to_float(d.visual_features);
  d.seen = std::move(seen);
  d.unseen = std::move(unseen);
  d.validate();

  if (truth) {
    truth->class_means = means;
    truth->class_scales = scales;
    truth->semantic_map = map;
    truth->mixing = mixing;
  }
  return d;
}

}  // namespace dfs
