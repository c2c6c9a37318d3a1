#pragma once

#include "dfs/types.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace dfs {

// Seeded random source. Normal deviates are produced with Box-Muller on top of
// mt19937_64 so the stream is bitwise reproducible across standard libraries
// (std::normal_distribution is implementation-defined).
//
// Not thread-safe; use one stream per training run, or derive() independent
// sub-streams for parallel work.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  // Independent stream keyed by (seed, stream_id).
  static RngStream derive(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64();
  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform();
  double uniform(double lo, double hi);
  // Uniform integer in [0, n).
  std::size_t index(std::size_t n);
  double normal();

  Vector normal_vector(Eigen::Index n);
  Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols);

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = index(i);
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace dfs
