#include "dfs/losses.hpp"

#include "dfs/error.hpp"

#include <cmath>
#include <string>

namespace dfs {

namespace {

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    fail(ErrorCode::kDimensionMismatch, what);
}

void require_nonempty(Eigen::Index rows) {
  require(rows > 0, ErrorCode::kInvalidArgument, "loss evaluated on an empty batch");
}

// Per-coordinate standard deviation of a clamped log-variance.
double sd(double lv) { return std::exp(0.5 * clamp_log_var(lv)); }

// d sd / d log_var; zero where the clamp is active.
double dsd(double lv) { return clamp_log_var(lv) == lv ? 0.5 * sd(lv) : 0.0; }

Matrix hconcat(const Matrix& left, const Matrix& right) {
  Matrix out(left.rows(), left.cols() + right.cols());
  out << left, right;
  return out;
}

}  // namespace

// ---- LossBreakdown / schedules ----

void LossBreakdown::add(std::string name, double value, double weight) {
  total += weight * value;
  terms.push_back({std::move(name), value, weight});
}

double LossBreakdown::weighted_sum() const {
  double s = 0.0;
  for (const LossTerm& t : terms) s += t.weight * t.value;
  return s;
}

bool LossBreakdown::has(std::string_view name) const {
  for (const LossTerm& t : terms)
    if (t.name == name) return true;
  return false;
}

double LossBreakdown::value(std::string_view name) const {
  for (const LossTerm& t : terms)
    if (t.name == name) return t.value;
  fail(ErrorCode::kInvalidArgument, "no loss term named " + std::string(name));
}

double LossBreakdown::weight(std::string_view name) const {
  for (const LossTerm& t : terms)
    if (t.name == name) return t.weight;
  fail(ErrorCode::kInvalidArgument, "no loss term named " + std::string(name));
}

void LossBreakdown::accumulate(const LossBreakdown& other) {
  if (terms.empty()) {
    *this = other;
    return;
  }
  require(terms.size() == other.terms.size(), ErrorCode::kInvalidArgument,
          "cannot accumulate loss breakdowns with different terms");
  total += other.total;
  for (std::size_t i = 0; i < terms.size(); ++i) terms[i].value += other.terms[i].value;
}

void LossBreakdown::scale(double factor) {
  total *= factor;
  for (LossTerm& t : terms) t.value *= factor;
}

double ScheduledWeight::at(int epoch) const {
  if (!warmup) return value;
  if (epoch <= warmup->start_epoch) return warmup->end_epoch <= warmup->start_epoch ? value : 0.0;
  if (epoch >= warmup->end_epoch) return value;
  return value * static_cast<double>(epoch - warmup->start_epoch) /
         static_cast<double>(warmup->end_epoch - warmup->start_epoch);
}

void AfgLossWeights::validate() const {
  for (const ScheduledWeight* w : {&beta1, &eta, &delta}) {
    require(w->value >= 0.0 && std::isfinite(w->value), ErrorCode::kInvalidArgument,
            "loss weights must be non-negative");
    if (w->warmup)
      require(w->warmup->end_epoch >= w->warmup->start_epoch && w->warmup->start_epoch >= 0,
              ErrorCode::kInvalidArgument, "warm-up must end at or after its start");
  }
}

ResolvedAfgWeights AfgLossWeights::at(int epoch) const {
  return {beta1.at(epoch), eta.at(epoch), delta.at(epoch)};
}

// ---- single-sample building blocks ----

double kl_to_standard_normal(const GaussianParams& g) {
  g.validate();
  double kl = 0.0;
  for (Eigen::Index d = 0; d < g.dim(); ++d) {
    const double lv = clamp_log_var(g.log_var(d));
    kl += g.mean(d) * g.mean(d) + std::exp(lv) - lv - 1.0;
  }
  return 0.5 * kl;
}

double l1_distance(const Vector& a, const Vector& b) {
  require(a.size() == b.size(), ErrorCode::kDimensionMismatch, "l1_distance length mismatch");
  return (a - b).cwiseAbs().sum();
}

double da_loss(const GaussianParams& g1, const GaussianParams& g2) {
  g1.validate();
  g2.validate();
  require(g1.dim() == g2.dim(), ErrorCode::kDimensionMismatch, "da_loss dimension mismatch");
  const double mean_sq = (g1.mean - g2.mean).squaredNorm();
  const double sd_sq = (g1.std_dev() - g2.std_dev()).squaredNorm();
  return std::sqrt(mean_sq + sd_sq);
}

LossBreakdown vae_loss(const Vector& recon, const Vector& target, const GaussianParams& g,
                       double beta1) {
  LossBreakdown out;
  out.add("recon", l1_distance(recon, target));
  out.add("kl", kl_to_standard_normal(g), beta1);
  return out;
}

double ca_loss(const Vector& x1, const Vector& x2, const Vector& z1, const Vector& z2,
               const MlpNet& d1, const MlpNet& d2) {
  return l1_distance(x1, d1.forward(z2)) + l1_distance(x2, d2.forward(z1));
}

LossBreakdown cvae_loss(const Vector& z2, const Vector& z2_recon, const GaussianParams& g3,
                        double beta2) {
  LossBreakdown out;
  out.add("recon", l1_distance(z2, z2_recon));
  out.add("kl", kl_to_standard_normal(g3), beta2);
  return out;
}

// ---- batch forms ----

double l1_rows(const Matrix& a, const Matrix& b, Matrix* grad_a, double scale) {
  require_same_shape(a, b, "l1_rows shape mismatch");
  require_nonempty(a.rows());
  const double inv_n = 1.0 / static_cast<double>(a.rows());
  if (grad_a) *grad_a += (scale * inv_n) * (a - b).unaryExpr(&sign);
  return (a - b).cwiseAbs().sum() * inv_n;
}

double kl_rows(const GaussianBatch& g, GaussianBatch* grad, double scale) {
  require_nonempty(g.rows());
  const double inv_n = 1.0 / static_cast<double>(g.rows());
  double kl = 0.0;
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    for (Eigen::Index d = 0; d < g.dim(); ++d) {
      const double m = g.mean(i, d);
      const double lv = clamp_log_var(g.log_var(i, d));
      const double var = std::exp(lv);
      kl += m * m + var - lv - 1.0;
      if (grad) {
        grad->mean(i, d) += scale * inv_n * m;
        if (lv == g.log_var(i, d)) grad->log_var(i, d) += scale * inv_n * 0.5 * (var - 1.0);
      }
    }
  }
  return 0.5 * kl * inv_n;
}

double da_rows(const GaussianBatch& g1, const GaussianBatch& g2, GaussianBatch* grad1,
               GaussianBatch* grad2, double scale) {
  require_same_shape(g1.mean, g2.mean, "da_rows shape mismatch");
  require_nonempty(g1.rows());
  const double inv_n = 1.0 / static_cast<double>(g1.rows());
  double total = 0.0;
  for (Eigen::Index i = 0; i < g1.rows(); ++i) {
    double sq = 0.0;
    for (Eigen::Index d = 0; d < g1.dim(); ++d) {
      const double dm = g1.mean(i, d) - g2.mean(i, d);
      const double ds = sd(g1.log_var(i, d)) - sd(g2.log_var(i, d));
      sq += dm * dm + ds * ds;
    }
    const double dist = std::sqrt(sq);
    total += dist;
    // The distance is not differentiable where both Gaussians coincide; use 0.
    if (dist == 0.0 || (!grad1 && !grad2)) continue;
    const double c = scale * inv_n / dist;
    for (Eigen::Index d = 0; d < g1.dim(); ++d) {
      const double dm = g1.mean(i, d) - g2.mean(i, d);
      const double s1 = sd(g1.log_var(i, d));
      const double s2 = sd(g2.log_var(i, d));
      if (grad1) {
        grad1->mean(i, d) += c * dm;
        grad1->log_var(i, d) += c * (s1 - s2) * dsd(g1.log_var(i, d));
      }
      if (grad2) {
        grad2->mean(i, d) -= c * dm;
        grad2->log_var(i, d) -= c * (s1 - s2) * dsd(g2.log_var(i, d));
      }
    }
  }
  return total * inv_n;
}

double ca_rows(const Matrix& x1, const Matrix& x2, const Matrix& z1, const Matrix& z2,
               const MlpNet& d1, const MlpNet& d2, CaGradients* grad, double scale,
               double* part1, double* part2) {
  require(z1.rows() == z2.rows() && x1.rows() == z1.rows() && x2.rows() == z1.rows(),
          ErrorCode::kDimensionMismatch, "ca_rows batch sizes differ");
  ForwardCache c1, c2;
  const Matrix x1_hat = d1.forward(z2, grad ? &c1 : nullptr);
  const Matrix x2_hat = d2.forward(z1, grad ? &c2 : nullptr);
  Matrix g1, g2;
  if (grad) {
    g1 = Matrix::Zero(x1_hat.rows(), x1_hat.cols());
    g2 = Matrix::Zero(x2_hat.rows(), x2_hat.cols());
  }
  const double a = l1_rows(x1_hat, x1, grad ? &g1 : nullptr, scale);
  const double b = l1_rows(x2_hat, x2, grad ? &g2 : nullptr, scale);
  if (grad) {
    grad->z2 += d1.backward(c1, g1, grad->d1);
    grad->z1 += d2.backward(c2, g2, grad->d2);
  }
  if (part1) *part1 = a;
  if (part2) *part2 = b;
  return a + b;
}

// ---- AFG objective ----

AfgGradients::AfgGradients(const AfgNets& nets)
    : e_sem(nets.e_sem), d_sem(nets.d_sem), e_vis(nets.e_vis), d_vis(nets.d_vis) {}

void AfgGradients::zero() {
  e_sem.zero();
  d_sem.zero();
  e_vis.zero();
  d_vis.zero();
}

LossBreakdown afg_objective(const AfgNets& nets, const AfgBatch& batch, const AfgNoise& noise,
                            const ResolvedAfgWeights& w, AfgGradients* grads) {
  require_nonempty(batch.semantic.rows());
  require(batch.semantic.rows() == batch.visual.rows(), ErrorCode::kDimensionMismatch,
          "AFG batch has unpaired rows");
  const bool want = grads != nullptr;

  ForwardCache ce_sem, ce_vis;
  const Matrix raw_sem = nets.e_sem.forward(batch.semantic, want ? &ce_sem : nullptr);
  const Matrix raw_vis = nets.e_vis.forward(batch.visual, want ? &ce_vis : nullptr);
  const GaussianBatch g_sem = gaussian_head(raw_sem);
  const GaussianBatch g_vis = gaussian_head(raw_vis);
  const Matrix z_sem = reparameterize(g_sem, noise.sem);
  const Matrix z_vis = reparameterize(g_vis, noise.vis);

  ForwardCache cd_sem, cd_vis;
  const Matrix rec_sem = nets.d_sem.forward(z_sem, want ? &cd_sem : nullptr);
  const Matrix rec_vis = nets.d_vis.forward(z_vis, want ? &cd_vis : nullptr);

  Matrix g_rec_sem, g_rec_vis;
  GaussianBatch gg_sem, gg_vis;
  if (want) {
    g_rec_sem = Matrix::Zero(rec_sem.rows(), rec_sem.cols());
    g_rec_vis = Matrix::Zero(rec_vis.rows(), rec_vis.cols());
    gg_sem = GaussianBatch::zeros_like(g_sem);
    gg_vis = GaussianBatch::zeros_like(g_vis);
  }

  LossBreakdown out;
  out.add("recon_sem", l1_rows(rec_sem, batch.semantic, want ? &g_rec_sem : nullptr));
  out.add("recon_vis", l1_rows(rec_vis, batch.visual, want ? &g_rec_vis : nullptr));
  out.add("kl_sem", kl_rows(g_sem, want ? &gg_sem : nullptr, w.beta1), w.beta1);
  out.add("kl_vis", kl_rows(g_vis, want ? &gg_vis : nullptr, w.beta1), w.beta1);
  out.add("da", da_rows(g_sem, g_vis, want ? &gg_sem : nullptr, want ? &gg_vis : nullptr, w.eta),
          w.eta);

  CaGradients ca_grad;
  if (want) {
    ca_grad.d1 = MlpGradients(nets.d_sem);
    ca_grad.d2 = MlpGradients(nets.d_vis);
    ca_grad.z1 = Matrix::Zero(z_sem.rows(), z_sem.cols());
    ca_grad.z2 = Matrix::Zero(z_vis.rows(), z_vis.cols());
  }
  double ca_sem = 0.0, ca_vis = 0.0;
  ca_rows(batch.semantic, batch.visual, z_sem, z_vis, nets.d_sem, nets.d_vis,
          want ? &ca_grad : nullptr, w.delta, &ca_sem, &ca_vis);
  out.add("ca_sem", ca_sem, w.delta);
  out.add("ca_vis", ca_vis, w.delta);

  if (!want) return out;

  Matrix dz_sem = nets.d_sem.backward(cd_sem, g_rec_sem, grads->d_sem) + ca_grad.z1;
  Matrix dz_vis = nets.d_vis.backward(cd_vis, g_rec_vis, grads->d_vis) + ca_grad.z2;
  for (std::size_t k = 0; k < ca_grad.d1.weight.size(); ++k) {
    grads->d_sem.weight[k] += ca_grad.d1.weight[k];
    grads->d_sem.bias[k] += ca_grad.d1.bias[k];
  }
  for (std::size_t k = 0; k < ca_grad.d2.weight.size(); ++k) {
    grads->d_vis.weight[k] += ca_grad.d2.weight[k];
    grads->d_vis.bias[k] += ca_grad.d2.bias[k];
  }
  reparameterize_backward(g_sem, noise.sem, dz_sem, gg_sem);
  reparameterize_backward(g_vis, noise.vis, dz_vis, gg_vis);
  nets.e_sem.backward(ce_sem, gaussian_head_backward(raw_sem, gg_sem), grads->e_sem);
  nets.e_vis.backward(ce_vis, gaussian_head_backward(raw_vis, gg_vis), grads->e_vis);
  return out;
}

LossBreakdown afg_loss(const AfgBatch& batch, const AfgNets& nets, const AfgLossWeights& weights,
                       int epoch, const AfgNoise& noise) {
  return afg_objective(nets, batch, noise, weights.at(epoch), nullptr);
}

// ---- CVAE objective ----

SfgGradients::SfgGradients(const SfgNets& nets) : e3(nets.e3), d3(nets.d3) {}

void SfgGradients::zero() {
  e3.zero();
  d3.zero();
}

LossBreakdown cvae_objective(const SfgNets& nets, const CvaeBatch& batch, const Matrix& noise,
                             double beta2, SfgGradients* grads) {
  require_nonempty(batch.condition.rows());
  require(batch.condition.rows() == batch.target.rows(), ErrorCode::kDimensionMismatch,
          "CVAE batch has unpaired rows");
  const bool want = grads != nullptr;

  ForwardCache ce, cd;
  const Matrix raw = nets.e3.forward(hconcat(batch.condition, batch.target), want ? &ce : nullptr);
  const GaussianBatch g3 = gaussian_head(raw);
  const Matrix z3 = reparameterize(g3, noise);
  const Matrix recon = nets.d3.forward(hconcat(z3, batch.condition), want ? &cd : nullptr);

  Matrix g_recon;
  GaussianBatch gg3;
  if (want) {
    g_recon = Matrix::Zero(recon.rows(), recon.cols());
    gg3 = GaussianBatch::zeros_like(g3);
  }
  LossBreakdown out;
  out.add("recon", l1_rows(recon, batch.target, want ? &g_recon : nullptr));
  out.add("kl", kl_rows(g3, want ? &gg3 : nullptr, beta2), beta2);
  if (!want) return out;

  const Matrix d_in = nets.d3.backward(cd, g_recon, grads->d3);
  reparameterize_backward(g3, noise, d_in.leftCols(z3.cols()), gg3);
  nets.e3.backward(ce, gaussian_head_backward(raw, gg3), grads->e3);
  return out;
}

}  // namespace dfs
