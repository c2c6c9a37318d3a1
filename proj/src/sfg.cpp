#include "dfs/sfg.hpp"

#include "dfs/error.hpp"

#include <cmath>
#include <string>

namespace dfs {

namespace {

constexpr std::uint64_t kInitStream = 20;
constexpr std::uint64_t kTrainStream = 21;

Matrix hconcat(const Matrix& left, const Matrix& right) {
  Matrix out(left.rows(), left.cols() + right.cols());
  out << left, right;
  return out;
}

std::vector<std::span<double>> all_spans(SfgNets& nets) {
  auto out = nets.e3.parameter_spans();
  for (auto s : nets.d3.parameter_spans()) out.push_back(s);
  return out;
}

std::vector<std::span<double>> all_spans(SfgGradients& g) {
  auto out = g.e3.spans();
  for (auto s : g.d3.spans()) out.push_back(s);
  return out;
}

}  // namespace

std::string_view to_string(ConditionMode mode) {
  switch (mode) {
    case ConditionMode::kRawSemantic: return "raw";
    case ConditionMode::kSampledZ1: return "sampled";
    case ConditionMode::kMeanZ1: return "mean";
  }
  return "mean";
}

ConditionMode parse_condition_mode(std::string_view name) {
  if (name == "raw") return ConditionMode::kRawSemantic;
  if (name == "sampled") return ConditionMode::kSampledZ1;
  if (name == "mean") return ConditionMode::kMeanZ1;
  fail(ErrorCode::kInvalidArgument,
       "unknown condition mode '" + std::string(name) + "' (expected raw, sampled or mean)");
}

void SfgConfig::validate() const {
  require(!latent_dim || *latent_dim >= 1, ErrorCode::kInvalidArgument,
          "latent_dim must be at least 1");
  require(beta2 >= 0.0 && std::isfinite(beta2), ErrorCode::kInvalidArgument,
          "beta2 must be non-negative");
  require(epochs >= 0, ErrorCode::kInvalidArgument, "epochs must be non-negative");
  require(batch_size >= 1, ErrorCode::kInvalidArgument, "batch_size must be at least 1");
  optimizer.validate();
}

SfgConfig SfgConfig::full_scale() {
  SfgConfig c;
  c.encoder_hidden = {1990};
  c.decoder_hidden = {1560};
  c.batch_size = 50;
  return c;
}

SfgModel::SfgModel(SfgNets nets, std::size_t aligned_dim, std::size_t latent_dim,
                   ConditionMode mode)
    : nets_(std::move(nets)), aligned_dim_(aligned_dim), latent_dim_(latent_dim), mode_(mode) {
  require(nets_.e3.output_dim() == 2 * latent_dim_, ErrorCode::kDimensionMismatch,
          "E3 must output 2 x latent_dim values");
  require(nets_.d3.output_dim() == aligned_dim_, ErrorCode::kDimensionMismatch,
          "D3 must output aligned_dim values");
  require(nets_.d3.input_dim() > latent_dim_ &&
              nets_.e3.input_dim() == condition_dim() + aligned_dim_,
          ErrorCode::kDimensionMismatch, "E3/D3 condition widths disagree");
}

GaussianBatch SfgModel::encode(const Matrix& condition, const Matrix& z2) const {
  return gaussian_head(nets_.e3.forward(hconcat(condition, z2)));
}

Matrix SfgModel::decode(const Matrix& noise, const Matrix& condition) const {
  return nets_.d3.forward(hconcat(noise, condition));
}

Matrix condition_rows(const AfgModel& afg, const Matrix& semantic_rows, ConditionMode mode,
                      RngStream& rng) {
  switch (mode) {
    case ConditionMode::kRawSemantic:
      return semantic_rows;
    case ConditionMode::kMeanZ1:
      return afg.encode_semantic(semantic_rows).mean;
    case ConditionMode::kSampledZ1: {
      const GaussianBatch g = afg.encode_semantic(semantic_rows);
      return reparameterize(g, rng.normal_matrix(g.rows(), g.dim()));
    }
  }
  return semantic_rows;
}

SfgModel init_sfg(const AfgModel& afg, const SfgConfig& config) {
  config.validate();
  const std::size_t d = afg.aligned_dim();
  const std::size_t latent = config.latent_dim.value_or(d);
  const std::size_t cond =
      config.condition == ConditionMode::kRawSemantic ? afg.semantic_dim() : d;
  RngStream rng = RngStream::derive(config.seed, kInitStream);
  SfgNets nets{
      MlpNet::uniform_init(layer_sizes(cond + d, config.encoder_hidden, 2 * latent), rng),
      MlpNet::uniform_init(layer_sizes(latent + cond, config.decoder_hidden, d), rng),
  };
  return SfgModel(std::move(nets), d, latent, config.condition);
}

SfgModel train_sfg(const DatasetAccess& data, const AfgModel& afg, const SfgConfig& config) {
  config.validate();
  require(afg.trained(), ErrorCode::kState, "SFG training needs a trained AFG");
  require(afg.semantic_dim() == data.semantic_dim() && afg.visual_dim() == data.visual_dim(),
          ErrorCode::kDimensionMismatch, "AFG dimensions do not match the dataset");
  std::vector<std::size_t> samples;
  for (std::size_t i : train_indices(data))
    if (is_seen(data, data.label(i))) samples.push_back(i);
  require(!samples.empty(), ErrorCode::kInvalidArgument, "SFG training needs TRAIN samples");

  const std::uint64_t afg_hash = afg.parameter_hash();
  SfgModel model = init_sfg(afg, config);
  if (config.epochs == 0) return model;

  const Matrix visual = gather_visual(data, samples);
  Matrix semantic(visual.rows(), static_cast<Eigen::Index>(data.semantic_dim()));
  for (std::size_t r = 0; r < samples.size(); ++r)
    semantic.row(static_cast<Eigen::Index>(r)) = data.semantic(data.label(samples[r])).transpose();
  // The AFG is frozen, so the posteriors can be computed once.
  const GaussianBatch visual_post = afg.encode_visual(visual);

  RngStream rng = RngStream::derive(config.seed, kTrainStream);
  OptimState optim(config.optimizer);
  SfgGradients grads(model.nets_);
  const auto params = all_spans(model.nets_);
  const auto grad_spans = all_spans(grads);
  const auto d = static_cast<Eigen::Index>(afg.aligned_dim());
  const auto latent = static_cast<Eigen::Index>(model.latent_dim());

  std::vector<Eigen::Index> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    LossBreakdown epoch_loss;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const auto b = static_cast<Eigen::Index>(end - start);
      Matrix sem(b, semantic.cols());
      GaussianBatch post{Matrix(b, d), Matrix(b, d)};
      for (Eigen::Index r = 0; r < b; ++r) {
        const Eigen::Index src = order[start + static_cast<std::size_t>(r)];
        sem.row(r) = semantic.row(src);
        post.mean.row(r) = visual_post.mean.row(src);
        post.log_var.row(r) = visual_post.log_var.row(src);
      }
      CvaeBatch batch;
      batch.condition = condition_rows(afg, sem, config.condition, rng);
      batch.target = reparameterize(post, rng.normal_matrix(b, d));
      const Matrix noise = rng.normal_matrix(b, latent);
      grads.zero();
      const LossBreakdown loss = cvae_objective(model.nets_, batch, noise, config.beta2, &grads);
      if (!std::isfinite(loss.total))
        fail(ErrorCode::kNumeric, "SFG loss is not finite at epoch " + std::to_string(epoch) +
                                      ", batch " + std::to_string(batches));
      optim.step(params, grad_spans);
      epoch_loss.accumulate(loss);
      ++batches;
    }
    epoch_loss.scale(1.0 / static_cast<double>(batches));
    model.history_.push_back(std::move(epoch_loss));
  }
  model.nets_.e3.round_parameters_to_float();
  model.nets_.d3.round_parameters_to_float();
  require(afg.parameter_hash() == afg_hash, ErrorCode::kState,
          "AFG parameters changed during SFG training");
  return model;
}

Vector sfg_reconstruct(const SfgModel& sfg, const Vector& z1, const Vector& z2, RngStream& rng) {
  require(static_cast<std::size_t>(z2.size()) == sfg.aligned_dim() &&
              static_cast<std::size_t>(z1.size()) == sfg.condition_dim(),
          ErrorCode::kDimensionMismatch, "sfg_reconstruct input dimensions do not match the model");
  const GaussianBatch g3 = sfg.encode(Matrix(z1.transpose()), Matrix(z2.transpose()));
  const Matrix z3 = reparameterize(g3, rng.normal_matrix(1, g3.dim()));
  return sfg.decode(z3, Matrix(z1.transpose())).row(0).transpose();
}

}  // namespace dfs
