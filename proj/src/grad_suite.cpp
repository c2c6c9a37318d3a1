#include "dfs/grad_suite.hpp"

#include "dfs/error.hpp"
#include "dfs/losses.hpp"
#include "dfs/rng.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <fmt/format.h>

namespace dfs {

namespace {

constexpr std::size_t kBatch = 3;
constexpr std::size_t kHidden = 8;
constexpr double kDyadicStep = 1.0 / 65536.0;

struct Case {
  std::vector<ParamBlock> blocks;
  LossEval eval;
};

void add_net(std::vector<ParamBlock>& blocks, const std::string& name, MlpNet& net,
             MlpGradients& grads) {
  auto values = net.parameter_spans();
  auto g = grads.spans();
  for (std::size_t k = 0; k < values.size(); ++k)
    blocks.push_back({fmt::format("{}.{}{}", name, k % 2 ? 'b' : 'w', k / 2), values[k], g[k]});
}

void add_matrix(std::vector<ParamBlock>& blocks, const std::string& name, Matrix& value,
                Matrix& grad) {
  blocks.push_back({name, as_span(value), as_span(grad)});
}

std::size_t pick_dim(RngStream& rng, std::size_t max_dim) {
  return 2 + rng.index(std::max<std::size_t>(max_dim, 2) - 1);
}

MlpNet small_net(std::size_t in, std::size_t out, RngStream& rng) {
  return MlpNet::uniform_init(layer_sizes(in, {kHidden}, out), rng);
}

// Log-variances in a range that stays clear of the clamp.
GaussianBatch random_gaussian(Eigen::Index rows, Eigen::Index d, RngStream& rng) {
  GaussianBatch g;
  g.mean = rng.normal_matrix(rows, d);
  g.log_var = Matrix::NullaryExpr(rows, d, [&] { return rng.uniform(-2.0, 1.0); });
  return g;
}

// Every check owns its state through shared_ptr so the closures outlive setup.
template <typename State>
std::shared_ptr<State> make_state() {
  return std::make_shared<State>();
}

Case kl_case(RngStream& rng, std::size_t max_dim, double sign) {
  struct S {
    GaussianBatch g, grad;
  };
  auto s = make_state<S>();
  const auto d = static_cast<Eigen::Index>(pick_dim(rng, max_dim));
  s->g = random_gaussian(kBatch, d, rng);
  s->grad = GaussianBatch::zeros_like(s->g);
  Case c;
  add_matrix(c.blocks, "mean", s->g.mean, s->grad.mean);
  add_matrix(c.blocks, "log_var", s->g.log_var, s->grad.log_var);
  c.eval = [s, sign](bool want) {
    if (!want) return kl_rows(s->g);
    s->grad.mean.setZero();
    s->grad.log_var.setZero();
    return kl_rows(s->g, &s->grad, sign);
  };
  return c;
}

Case l1_case(RngStream& rng, std::size_t max_dim, double sign, bool ties) {
  struct S {
    Matrix a, b, grad;
  };
  auto s = make_state<S>();
  const auto d = static_cast<Eigen::Index>(pick_dim(rng, max_dim));
  if (ties) {
    // Multiples of 1/4 in [-2, 2]; every other coordinate tied to its target.
    auto grid = [&] { return static_cast<double>(static_cast<int>(rng.index(17)) - 8) / 4.0; };
    const Eigen::Index rows = 4;
    s->a = Matrix::NullaryExpr(rows, d, grid);
    s->b = Matrix::NullaryExpr(rows, d, grid);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < d; ++j)
        if ((i + j) % 2 == 0) s->b(i, j) = s->a(i, j);
  } else {
    s->a = rng.normal_matrix(kBatch, d);
    s->b = rng.normal_matrix(kBatch, d);
  }
  s->grad = Matrix::Zero(s->a.rows(), d);
  Case c;
  add_matrix(c.blocks, "a", s->a, s->grad);
  c.eval = [s, sign](bool want) {
    if (!want) return l1_rows(s->a, s->b);
    s->grad.setZero();
    return l1_rows(s->a, s->b, &s->grad, sign);
  };
  return c;
}

Case da_case(RngStream& rng, std::size_t max_dim, double sign) {
  struct S {
    GaussianBatch g1, g2, grad1, grad2;
  };
  auto s = make_state<S>();
  const auto d = static_cast<Eigen::Index>(pick_dim(rng, max_dim));
  s->g1 = random_gaussian(kBatch, d, rng);
  s->g2 = random_gaussian(kBatch, d, rng);
  s->grad1 = GaussianBatch::zeros_like(s->g1);
  s->grad2 = GaussianBatch::zeros_like(s->g2);
  Case c;
  add_matrix(c.blocks, "mean1", s->g1.mean, s->grad1.mean);
  add_matrix(c.blocks, "log_var1", s->g1.log_var, s->grad1.log_var);
  add_matrix(c.blocks, "mean2", s->g2.mean, s->grad2.mean);
  add_matrix(c.blocks, "log_var2", s->g2.log_var, s->grad2.log_var);
  c.eval = [s, sign](bool want) {
    if (!want) return da_rows(s->g1, s->g2);
    for (GaussianBatch* g : {&s->grad1, &s->grad2}) {
      g->mean.setZero();
      g->log_var.setZero();
    }
    return da_rows(s->g1, s->g2, &s->grad1, &s->grad2, sign);
  };
  return c;
}

Case ca_case(RngStream& rng, std::size_t max_dim, double sign) {
  struct S {
    Matrix x1, x2, z1, z2;
    MlpNet d1, d2;
    CaGradients grad;
  };
  auto s = make_state<S>();
  const auto d1 = static_cast<Eigen::Index>(pick_dim(rng, max_dim));
  const auto d2 = static_cast<Eigen::Index>(pick_dim(rng, max_dim));
  const auto k = static_cast<Eigen::Index>(pick_dim(rng, max_dim));
  s->x1 = rng.normal_matrix(kBatch, d1);
  s->x2 = rng.normal_matrix(kBatch, d2);
  s->z1 = rng.normal_matrix(kBatch, k);
  s->z2 = rng.normal_matrix(kBatch, k);
  s->d1 = small_net(static_cast<std::size_t>(k), static_cast<std::size_t>(d1), rng);
  s->d2 = small_net(static_cast<std::size_t>(k), static_cast<std::size_t>(d2), rng);
  s->grad.d1 = MlpGradients(s->d1);
  s->grad.d2 = MlpGradients(s->d2);
  s->grad.z1 = Matrix::Zero(kBatch, k);
  s->grad.z2 = Matrix::Zero(kBatch, k);
  Case c;
  add_net(c.blocks, "d1", s->d1, s->grad.d1);
  add_net(c.blocks, "d2", s->d2, s->grad.d2);
  add_matrix(c.blocks, "z1", s->z1, s->grad.z1);
  add_matrix(c.blocks, "z2", s->z2, s->grad.z2);
  c.eval = [s, sign](bool want) {
    if (!want) return ca_rows(s->x1, s->x2, s->z1, s->z2, s->d1, s->d2);
    s->grad.d1.zero();
    s->grad.d2.zero();
    s->grad.z1.setZero();
    s->grad.z2.setZero();
    return ca_rows(s->x1, s->x2, s->z1, s->z2, s->d1, s->d2, &s->grad, sign);
  };
  return c;
}

// Weights are arbitrary positive values; eta = delta = 0 leaves the two VAEs.
Case afg_case(RngStream& rng, std::size_t max_dim, double sign, bool vae_only) {
  struct S {
    AfgNets nets;
    AfgGradients grads;
    AfgBatch batch;
    AfgNoise noise;
    ResolvedAfgWeights w;
  };
  auto s = make_state<S>();
  const std::size_t da = pick_dim(rng, max_dim);
  const std::size_t dv = pick_dim(rng, max_dim);
  const std::size_t k = pick_dim(rng, max_dim);
  s->nets.e_sem = small_net(da, 2 * k, rng);
  s->nets.d_sem = small_net(k, da, rng);
  s->nets.e_vis = small_net(dv, 2 * k, rng);
  s->nets.d_vis = small_net(k, dv, rng);
  s->grads = AfgGradients(s->nets);
  const auto b = static_cast<Eigen::Index>(kBatch);
  s->batch.semantic = rng.normal_matrix(b, static_cast<Eigen::Index>(da));
  s->batch.visual = rng.normal_matrix(b, static_cast<Eigen::Index>(dv));
  s->noise.sem = rng.normal_matrix(b, static_cast<Eigen::Index>(k));
  s->noise.vis = rng.normal_matrix(b, static_cast<Eigen::Index>(k));
  s->w = {rng.uniform(0.2, 1.0), vae_only ? 0.0 : rng.uniform(1.0, 5.0),
          vae_only ? 0.0 : rng.uniform(0.5, 2.0)};
  Case c;
  add_net(c.blocks, "e_sem", s->nets.e_sem, s->grads.e_sem);
  add_net(c.blocks, "d_sem", s->nets.d_sem, s->grads.d_sem);
  add_net(c.blocks, "e_vis", s->nets.e_vis, s->grads.e_vis);
  add_net(c.blocks, "d_vis", s->nets.d_vis, s->grads.d_vis);
  c.eval = [s, sign](bool want) {
    if (!want) return afg_objective(s->nets, s->batch, s->noise, s->w).total;
    s->grads.zero();
    const double f = afg_objective(s->nets, s->batch, s->noise, s->w, &s->grads).total;
    if (sign < 0) {
      for (MlpGradients* g : {&s->grads.e_sem, &s->grads.d_sem, &s->grads.e_vis, &s->grads.d_vis})
        for (auto sp : g->spans())
          for (double& v : sp) v = -v;
    }
    return f;
  };
  return c;
}

Case cvae_case(RngStream& rng, std::size_t max_dim, double sign) {
  struct S {
    SfgNets nets;
    SfgGradients grads;
    CvaeBatch batch;
    Matrix noise;
    double beta2 = 0.6;
  };
  auto s = make_state<S>();
  const std::size_t cond = pick_dim(rng, max_dim);
  const std::size_t k = pick_dim(rng, max_dim);
  const std::size_t latent = pick_dim(rng, max_dim);
  s->nets.e3 = small_net(cond + k, 2 * latent, rng);
  s->nets.d3 = small_net(latent + cond, k, rng);
  s->grads = SfgGradients(s->nets);
  const auto b = static_cast<Eigen::Index>(kBatch);
  s->batch.condition = rng.normal_matrix(b, static_cast<Eigen::Index>(cond));
  s->batch.target = rng.normal_matrix(b, static_cast<Eigen::Index>(k));
  s->noise = rng.normal_matrix(b, static_cast<Eigen::Index>(latent));
  s->beta2 = rng.uniform(0.2, 1.0);
  Case c;
  add_net(c.blocks, "e3", s->nets.e3, s->grads.e3);
  add_net(c.blocks, "d3", s->nets.d3, s->grads.d3);
  c.eval = [s, sign](bool want) {
    if (!want) return cvae_objective(s->nets, s->batch, s->noise, s->beta2).total;
    s->grads.zero();
    const double f = cvae_objective(s->nets, s->batch, s->noise, s->beta2, &s->grads).total;
    if (sign < 0) {
      for (MlpGradients* g : {&s->grads.e3, &s->grads.d3})
        for (auto sp : g->spans())
          for (double& v : sp) v = -v;
    }
    return f;
  };
  return c;
}

Case make_case(const std::string& loss, RngStream& rng, const GradSuiteOptions& o) {
  const double sign = o.sign_flip_target == loss ? -1.0 : 1.0;
  if (loss == "kl") return kl_case(rng, o.max_dim, sign);
  if (loss == "l1") return l1_case(rng, o.max_dim, sign, o.tie_point);
  if (loss == "vae") return afg_case(rng, o.max_dim, sign, true);
  if (loss == "da") return da_case(rng, o.max_dim, sign);
  if (loss == "ca") return ca_case(rng, o.max_dim, sign);
  if (loss == "cvae") return cvae_case(rng, o.max_dim, sign);
  if (loss == "afg") return afg_case(rng, o.max_dim, sign, false);
  fail(ErrorCode::kInvalidArgument, "unknown loss " + loss);
}

}  // namespace

const std::vector<std::string>& gradient_suite_losses() {
  static const std::vector<std::string> names{"kl", "l1", "vae", "da", "ca", "cvae", "afg"};
  return names;
}

std::vector<GradSuiteResult> run_gradient_suite(const GradSuiteOptions& options) {
  require(options.instances >= 1, ErrorCode::kInvalidArgument, "need at least one instance");
  require(options.max_dim >= 2, ErrorCode::kInvalidArgument, "max_dim must be at least 2");
  if (!options.sign_flip_target.empty()) {
    const auto& names = gradient_suite_losses();
    require(std::find(names.begin(), names.end(), options.sign_flip_target) != names.end(),
            ErrorCode::kInvalidArgument, "unknown loss " + options.sign_flip_target);
  }
  const std::vector<std::string> losses =
      options.tie_point ? std::vector<std::string>{"l1"} : gradient_suite_losses();

  std::vector<GradSuiteResult> results;
  for (std::size_t li = 0; li < losses.size(); ++li) {
    GradSuiteResult r;
    r.loss = options.tie_point ? "l1_tie" : losses[li];
    RngStream rng = RngStream::derive(options.seed, 100 + li);
    for (int n = 0; n < options.instances; ++n) {
      Case c = make_case(losses[li], rng, options);
      GradCheckOptions check = options.check;
      if (options.tie_point) check.step = kDyadicStep;
      const GradCheckReport rep = grad_check(c.eval, c.blocks, check);
      ++r.instances;
      r.checked += rep.checked;
      r.skipped += rep.skipped;
      if (rep.max_rel_error > r.max_rel_error) r.max_rel_error = rep.max_rel_error;
      r.passed = r.passed && rep.passed;
      for (const std::string& note : rep.notes)
        r.notes.push_back(fmt::format("instance {}: {}", n, note));
    }
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace dfs
