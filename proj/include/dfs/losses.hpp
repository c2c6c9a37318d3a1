#pragma once

#include "dfs/gaussian.hpp"
#include "dfs/mlp.hpp"
#include "dfs/types.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dfs {

struct LossTerm {
  std::string name;
  double value = 0.0;
  double weight = 1.0;
};

// A total and the weighted components it was assembled from.
struct LossBreakdown {
  double total = 0.0;
  std::vector<LossTerm> terms;

  void add(std::string name, double value, double weight = 1.0);
  double weighted_sum() const;
  bool has(std::string_view name) const;
  double value(std::string_view name) const;
  double weight(std::string_view name) const;

  // Element-wise running sum, for averaging breakdowns with identical terms.
  void accumulate(const LossBreakdown& other);
  void scale(double factor);
};

// Linear ramp from 0 at start_epoch to the final value at end_epoch.
struct WarmUp {
  int start_epoch = 0;
  int end_epoch = 0;
};

struct ScheduledWeight {
  double value = 0.0;
  std::optional<WarmUp> warmup;

  double at(int epoch) const;
};

struct ResolvedAfgWeights {
  double beta1 = 0.0;
  double eta = 0.0;
  double delta = 0.0;
};

struct AfgLossWeights {
  ScheduledWeight beta1{0.5, std::nullopt};
  ScheduledWeight eta{5.0, std::nullopt};
  ScheduledWeight delta{2.0, std::nullopt};

  void validate() const;
  ResolvedAfgWeights at(int epoch) const;
};

// ---- single-sample building blocks ----

// 0.5 * sum(mu^2 + sigma^2 - log sigma^2 - 1)
double kl_to_standard_normal(const GaussianParams& g);
// sum |a_i - b_i|
double l1_distance(const Vector& a, const Vector& b);
// sqrt(||mu1 - mu2||^2 + ||sd1 - sd2||^2): 2-Wasserstein distance between
// diagonal Gaussians.
double da_loss(const GaussianParams& g1, const GaussianParams& g2);
// Terms "recon" and "kl" (weight beta1).
LossBreakdown vae_loss(const Vector& recon, const Vector& target, const GaussianParams& g,
                       double beta1);
// |x1 - d1(z2)|_1 + |x2 - d2(z1)|_1
double ca_loss(const Vector& x1, const Vector& x2, const Vector& z1, const Vector& z2,
               const MlpNet& d1, const MlpNet& d2);
// Terms "recon" and "kl" (weight beta2).
LossBreakdown cvae_loss(const Vector& z2, const Vector& z2_recon, const GaussianParams& g3,
                        double beta2);

// ---- batch forms: mean over rows, optional gradient ----
//
// Gradients are *added* into the outputs, multiplied by `scale`, so callers can
// compose weighted sums.

double l1_rows(const Matrix& a, const Matrix& b, Matrix* grad_a = nullptr, double scale = 1.0);
double kl_rows(const GaussianBatch& g, GaussianBatch* grad = nullptr, double scale = 1.0);
double da_rows(const GaussianBatch& g1, const GaussianBatch& g2, GaussianBatch* grad1 = nullptr,
               GaussianBatch* grad2 = nullptr, double scale = 1.0);

struct CaGradients {
  MlpGradients d1;
  MlpGradients d2;
  Matrix z1;
  Matrix z2;
};

// Batch cross-reconstruction loss; per-modality parts are returned through
// part1/part2 when non-null.
double ca_rows(const Matrix& x1, const Matrix& x2, const Matrix& z1, const Matrix& z2,
               const MlpNet& d1, const MlpNet& d2, CaGradients* grad = nullptr,
               double scale = 1.0, double* part1 = nullptr, double* part2 = nullptr);

// ---- full objectives ----

// Stage-1 networks. Modality 1 is semantic, modality 2 visual.
struct AfgNets {
  MlpNet e_sem;
  MlpNet d_sem;
  MlpNet e_vis;
  MlpNet d_vis;

  bool operator==(const AfgNets&) const = default;
};

struct AfgGradients {
  MlpGradients e_sem;
  MlpGradients d_sem;
  MlpGradients e_vis;
  MlpGradients d_vis;

  AfgGradients() = default;
  explicit AfgGradients(const AfgNets& nets);
  void zero();
};

// Paired rows: semantic embedding of the sample's class and its visual feature.
struct AfgBatch {
  Matrix semantic;
  Matrix visual;
};

// Standard-normal draws for the two reparameterizations (batch x aligned_dim).
struct AfgNoise {
  Matrix sem;
  Matrix vis;
};

// VAE (both modalities) + eta * DA + delta * CA, averaged over the batch.
// Terms: recon_sem, recon_vis, kl_sem, kl_vis, da, ca_sem, ca_vis.
LossBreakdown afg_objective(const AfgNets& nets, const AfgBatch& batch, const AfgNoise& noise,
                            const ResolvedAfgWeights& w, AfgGradients* grads = nullptr);

LossBreakdown afg_loss(const AfgBatch& batch, const AfgNets& nets, const AfgLossWeights& weights,
                       int epoch, const AfgNoise& noise);

// Stage-2 networks: E3 reads (condition | z2), D3 reads (z3 | condition).
struct SfgNets {
  MlpNet e3;
  MlpNet d3;

  bool operator==(const SfgNets&) const = default;
};

struct SfgGradients {
  MlpGradients e3;
  MlpGradients d3;

  SfgGradients() = default;
  explicit SfgGradients(const SfgNets& nets);
  void zero();
};

struct CvaeBatch {
  Matrix condition;  // z1 (or raw semantic)
  Matrix target;     // z2
};

// Terms: recon, kl (weight beta2). noise: batch x latent_dim.
LossBreakdown cvae_objective(const SfgNets& nets, const CvaeBatch& batch, const Matrix& noise,
                             double beta2, SfgGradients* grads = nullptr);

}  // namespace dfs
