#include "dfs/gaussian.hpp"

#include "dfs/error.hpp"

#include <algorithm>
#include <cmath>

namespace dfs {

double clamp_log_var(double lv) { return std::clamp(lv, kLogVarMin, kLogVarMax); }

GaussianParams::GaussianParams(Vector m, Vector lv) : mean(std::move(m)), log_var(std::move(lv)) {
  require(mean.size() == log_var.size(), ErrorCode::kDimensionMismatch,
          "GaussianParams mean and log_var differ in length");
}

Vector GaussianParams::variance() const {
  return log_var.unaryExpr([](double lv) { return std::exp(clamp_log_var(lv)); });
}

Vector GaussianParams::std_dev() const {
  return log_var.unaryExpr([](double lv) { return std::exp(0.5 * clamp_log_var(lv)); });
}

void GaussianParams::validate() const {
  require(mean.size() == log_var.size(), ErrorCode::kDimensionMismatch,
          "GaussianParams mean and log_var differ in length");
  require(mean.allFinite() && log_var.allFinite(), ErrorCode::kNonFinite,
          "GaussianParams has non-finite entries");
}

GaussianParams GaussianBatch::row(Eigen::Index i) const {
  return GaussianParams(mean.row(i).transpose(), log_var.row(i).transpose());
}

Matrix GaussianBatch::std_dev() const {
  return log_var.unaryExpr([](double lv) { return std::exp(0.5 * clamp_log_var(lv)); });
}

GaussianBatch GaussianBatch::zeros_like(const GaussianBatch& g) {
  return {Matrix::Zero(g.mean.rows(), g.mean.cols()),
          Matrix::Zero(g.log_var.rows(), g.log_var.cols())};
}

GaussianBatch gaussian_head(const Matrix& raw) {
  require(raw.cols() % 2 == 0, ErrorCode::kDimensionMismatch,
          "Gaussian head needs an even number of encoder outputs");
  const Eigen::Index d = raw.cols() / 2;
  GaussianBatch g;
  g.mean = raw.leftCols(d);
  g.log_var = raw.rightCols(d).unaryExpr([](double lv) { return clamp_log_var(lv); });
  return g;
}

Matrix gaussian_head_backward(const Matrix& raw, const GaussianBatch& grad) {
  const Eigen::Index d = raw.cols() / 2;
  Matrix out(raw.rows(), raw.cols());
  out.leftCols(d) = grad.mean;
  const auto inside =
      (raw.rightCols(d).array() >= kLogVarMin) && (raw.rightCols(d).array() <= kLogVarMax);
  out.rightCols(d) = inside.select(grad.log_var, 0.0);
  return out;
}

Vector reparameterize(const GaussianParams& g, RngStream& rng) {
  g.validate();
  const Vector eps = rng.normal_vector(g.dim());
  return g.mean + g.std_dev().cwiseProduct(eps);
}

Matrix reparameterize(const GaussianBatch& g, const Matrix& noise) {
  require(noise.rows() == g.rows() && noise.cols() == g.dim(), ErrorCode::kDimensionMismatch,
          "reparameterization noise shape does not match the Gaussian batch");
  return g.mean + g.std_dev().cwiseProduct(noise);
}

void reparameterize_backward(const GaussianBatch& g, const Matrix& noise, const Matrix& grad_z,
                             GaussianBatch& grad) {
  grad.mean += grad_z;
  grad.log_var += (0.5 * grad_z.array() * g.std_dev().array() * noise.array()).matrix();
}

}  // namespace dfs
