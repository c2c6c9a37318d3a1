#pragma once

#include "dfs/dataset.hpp"

#include <cstdint>

namespace dfs {

// Class-conditional Gaussian benchmark with a known semantic-to-visual map.
// Each class c has a semantic prototype a_c ~ N(0, I); its visual mean is
// M a_c + map_noise * n_c for a fixed random linear map M, and visual samples
// are mean + scale_c * (L e) with e ~ N(0, I) and a shared mixing L whose
// covariance L L^T has eigenvalues proportional to decay^i (unit average).
struct SyntheticBenchmarkSpec {
  std::size_t num_seen = 8;
  std::size_t num_unseen = 4;
  std::size_t visual_dim = 32;
  std::size_t semantic_dim = 12;
  std::size_t samples_per_class = 60;
  double class_separation = 1.0;  // scales M
  double cov_scale = 1.0;
  double map_noise = 0.25;
  double spectrum_decay = 0.7;    // 1 is isotropic within-class noise
  std::size_t semantic_rank = 4;  // prototypes lie in a subspace of this rank; 0 = full
  double test_fraction = 0.2;     // of each seen class; unseen samples are all TEST
  std::uint64_t seed = 0;

  void validate() const;
};

struct BenchmarkGroundTruth {
  RowMatrix class_means;  // C x Dv
  Vector class_scales;    // C
  Matrix semantic_map;    // Dv x Da
  Matrix mixing;          // Dv x Dv
};

FeatureDataset generate_synthetic_benchmark(const SyntheticBenchmarkSpec& spec,
                                            BenchmarkGroundTruth* truth = nullptr);

}  // namespace dfs
