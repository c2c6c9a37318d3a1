#include "dfs/optim.hpp"

#include "dfs/error.hpp"

#include <cmath>
#include <string>

namespace dfs {

void AdamConfig::validate() const {
  require(learning_rate > 0.0 && std::isfinite(learning_rate), ErrorCode::kInvalidArgument,
          "learning rate must be positive");
  require(beta1 > 0.0 && beta1 < 1.0 && beta2 > 0.0 && beta2 < 1.0, ErrorCode::kInvalidArgument,
          "moment decay rates must lie in (0, 1)");
  require(epsilon > 0.0, ErrorCode::kInvalidArgument, "epsilon must be positive");
}

void OptimState::step(std::span<const std::span<double>> params,
                      std::span<const std::span<double>> grads) {
  require(params.size() == grads.size(), ErrorCode::kDimensionMismatch,
          "parameter and gradient block counts differ");
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.emplace_back(p.size(), 0.0);
      v_.emplace_back(p.size(), 0.0);
    }
  }
  require(m_.size() == params.size(), ErrorCode::kDimensionMismatch,
          "optimizer state was built for a different parameter list");
  for (std::size_t b = 0; b < params.size(); ++b) {
    require(params[b].size() == grads[b].size() && params[b].size() == m_[b].size(),
            ErrorCode::kDimensionMismatch, "parameter block " + std::to_string(b) + " changed shape");
    for (double g : grads[b])
      if (!std::isfinite(g))
        fail(ErrorCode::kNumeric, "non-finite gradient in block " + std::to_string(b) +
                                      " at step " + std::to_string(step_ + 1));
  }

  ++step_;
  const double t = static_cast<double>(step_);
  const double c1 = 1.0 - std::pow(config_.beta1, t);
  const double c2 = 1.0 - std::pow(config_.beta2, t);
  for (std::size_t b = 0; b < params.size(); ++b) {
    auto p = params[b];
    auto g = grads[b];
    auto& m = m_[b];
    auto& v = v_[b];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g[i];
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      p[i] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }
}

}  // namespace dfs
