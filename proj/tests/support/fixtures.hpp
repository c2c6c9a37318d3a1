#pragma once

#include "dfs/benchmark.hpp"
#include "dfs/dataset.hpp"

// Small benchmark for tests that train: 3 seen / 2 unseen classes.
inline dfs::FeatureDataset tiny_benchmark(std::uint64_t seed = 0) {
  dfs::SyntheticBenchmarkSpec spec;
  spec.num_seen = 3;
  spec.num_unseen = 2;
  spec.visual_dim = 8;
  spec.semantic_dim = 5;
  spec.semantic_rank = 2;
  spec.samples_per_class = 20;
  spec.seed = seed;
  return dfs::generate_synthetic_benchmark(spec);
}
