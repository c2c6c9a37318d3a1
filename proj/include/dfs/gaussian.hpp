#pragma once

#include "dfs/rng.hpp"
#include "dfs/types.hpp"

namespace dfs {

// Bounds applied to log-variance before exponentiation.
inline constexpr double kLogVarMin = -30.0;
inline constexpr double kLogVarMax = 10.0;

double clamp_log_var(double lv);

// Diagonal Gaussian N(mean, diag(exp(log_var))).
struct GaussianParams {
  Vector mean;
  Vector log_var;

  GaussianParams() = default;
  GaussianParams(Vector m, Vector lv);

  Eigen::Index dim() const { return mean.size(); }
  Vector variance() const;
  Vector std_dev() const;
  // Throws kDimensionMismatch / kNonFinite.
  void validate() const;
};

// One diagonal Gaussian per row.
struct GaussianBatch {
  Matrix mean;
  Matrix log_var;

  Eigen::Index rows() const { return mean.rows(); }
  Eigen::Index dim() const { return mean.cols(); }
  GaussianParams row(Eigen::Index i) const;
  Matrix std_dev() const;

  static GaussianBatch zeros_like(const GaussianBatch& g);
};

// Splits raw encoder output [mean | log_var] (batch x 2d) into a Gaussian,
// clamping log_var.
GaussianBatch gaussian_head(const Matrix& raw);
// Gradient w.r.t. the raw encoder output given gradients w.r.t. the head.
// Clamped coordinates pass no gradient.
Matrix gaussian_head_backward(const Matrix& raw, const GaussianBatch& grad);

// z = mean + exp(0.5 log_var) * eps with eps ~ N(0, I) from rng.
Vector reparameterize(const GaussianParams& g, RngStream& rng);

// Batch form with explicit noise (batch x d), used during training so the
// loss is a deterministic function of the parameters.
Matrix reparameterize(const GaussianBatch& g, const Matrix& noise);
// Adds dL/dmean and dL/dlog_var given dL/dz into grad.
void reparameterize_backward(const GaussianBatch& g, const Matrix& noise,
                             const Matrix& grad_z, GaussianBatch& grad);

}  // namespace dfs
