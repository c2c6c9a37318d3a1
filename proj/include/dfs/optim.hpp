#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace dfs {

struct AdamConfig {
  double learning_rate = 1.5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

// Adaptive-moment optimizer state for a fixed list of parameter blocks.
class OptimState {
 public:
  OptimState() = default;
  explicit OptimState(AdamConfig config) : config_(config) { config_.validate(); }

  const AdamConfig& config() const { return config_; }
  std::uint64_t step_count() const { return step_; }
  const std::vector<std::vector<double>>& first_moments() const { return m_; }
  const std::vector<std::vector<double>>& second_moments() const { return v_; }

  // Applies one bias-corrected update. Block shapes are fixed on the first
  // call. Throws kNumeric on a non-finite gradient before touching anything.
  void step(std::span<const std::span<double>> params,
            std::span<const std::span<double>> grads);

 private:
  AdamConfig config_;
  std::uint64_t step_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

}  // namespace dfs
