#include "dfs/afg.hpp"

#include "dfs/error.hpp"
#include "dfs/hash.hpp"

#include <cmath>
#include <string>

namespace dfs {

namespace {

constexpr std::uint64_t kInitStream = 10;
constexpr std::uint64_t kTrainStream = 11;

std::vector<std::span<double>> all_spans(AfgNets& nets) {
  std::vector<std::span<double>> out;
  for (MlpNet* n : {&nets.e_sem, &nets.d_sem, &nets.e_vis, &nets.d_vis})
    for (auto s : n->parameter_spans()) out.push_back(s);
  return out;
}

std::vector<std::span<double>> all_spans(AfgGradients& g) {
  std::vector<std::span<double>> out;
  for (MlpGradients* n : {&g.e_sem, &g.d_sem, &g.e_vis, &g.d_vis})
    for (auto s : n->spans()) out.push_back(s);
  return out;
}


}  // namespace

void AfgConfig::validate() const {
  require(aligned_dim >= 1, ErrorCode::kInvalidArgument, "aligned_dim must be at least 1");
  require(epochs >= 0, ErrorCode::kInvalidArgument, "epochs must be non-negative");
  require(batch_size >= 1, ErrorCode::kInvalidArgument, "batch_size must be at least 1");
  optimizer.validate();
  weights.validate();
}

AfgConfig AfgConfig::fine_grained() {
  AfgConfig c;
  c.aligned_dim = 256;
  c.sem_encoder_hidden = {3600};
  c.sem_decoder_hidden = {1330};
  c.vis_encoder_hidden = {6240};
  c.vis_decoder_hidden = {4980};
  c.batch_size = 50;
  return c;
}

AfgModel::AfgModel(AfgNets nets, std::size_t aligned_dim, bool trained)
    : nets_(std::move(nets)), aligned_dim_(aligned_dim), trained_(trained) {
  const auto d = aligned_dim_;
  require(nets_.e_sem.output_dim() == 2 * d && nets_.e_vis.output_dim() == 2 * d,
          ErrorCode::kDimensionMismatch, "AFG encoders must output 2 x aligned_dim values");
  require(nets_.d_sem.input_dim() == d && nets_.d_vis.input_dim() == d,
          ErrorCode::kDimensionMismatch, "AFG decoders must read aligned_dim values");
  require(nets_.d_sem.output_dim() == nets_.e_sem.input_dim() &&
              nets_.d_vis.output_dim() == nets_.e_vis.input_dim(),
          ErrorCode::kDimensionMismatch, "AFG decoders must reconstruct their encoder's input");
}

GaussianParams AfgModel::encode_semantic(const Vector& a) const {
  return encode_semantic(Matrix(a.transpose())).row(0);
}

GaussianParams AfgModel::encode_visual(const Vector& v) const {
  return encode_visual(Matrix(v.transpose())).row(0);
}

GaussianBatch AfgModel::encode_semantic(const Matrix& rows) const {
  return gaussian_head(nets_.e_sem.forward(rows));
}

GaussianBatch AfgModel::encode_visual(const Matrix& rows) const {
  return gaussian_head(nets_.e_vis.forward(rows));
}

std::uint64_t AfgModel::parameter_hash() const {
  Fnv1a h;
  AfgNets copy = nets_;
  for (auto s : all_spans(copy)) h.update(std::span<const double>(s));
  return h.digest();
}

AfgModel init_afg(std::size_t semantic_dim, std::size_t visual_dim, const AfgConfig& config) {
  config.validate();
  RngStream rng = RngStream::derive(config.seed, kInitStream);
  const std::size_t d = config.aligned_dim;
  AfgNets nets{
      MlpNet::uniform_init(layer_sizes(semantic_dim, config.sem_encoder_hidden, 2 * d), rng),
      MlpNet::uniform_init(layer_sizes(d, config.sem_decoder_hidden, semantic_dim), rng),
      MlpNet::uniform_init(layer_sizes(visual_dim, config.vis_encoder_hidden, 2 * d), rng),
      MlpNet::uniform_init(layer_sizes(d, config.vis_decoder_hidden, visual_dim), rng),
  };
  return AfgModel(std::move(nets), d, false);
}

AfgModel train_afg(const DatasetAccess& data, const AfgConfig& config) {
  config.validate();
  require(!data.seen_classes().empty(), ErrorCode::kInvalidArgument,
          "AFG training needs at least one seen class");
  std::vector<std::size_t> samples;
  for (std::size_t i : train_indices(data))
    if (is_seen(data, data.label(i))) samples.push_back(i);
  require(!samples.empty(), ErrorCode::kInvalidArgument, "AFG training needs TRAIN samples");

  AfgModel model = init_afg(data.semantic_dim(), data.visual_dim(), config);
  model.trained_ = true;
  if (config.epochs == 0) return model;

  const Matrix visual = gather_visual(data, samples);
  Matrix semantic(visual.rows(), static_cast<Eigen::Index>(data.semantic_dim()));
  for (std::size_t r = 0; r < samples.size(); ++r)
    semantic.row(static_cast<Eigen::Index>(r)) = data.semantic(data.label(samples[r])).transpose();

  RngStream rng = RngStream::derive(config.seed, kTrainStream);
  OptimState optim(config.optimizer);
  AfgGradients grads(model.nets_);
  const auto params = all_spans(model.nets_);
  const auto grad_spans = all_spans(grads);
  const auto d = static_cast<Eigen::Index>(config.aligned_dim);

  std::vector<Eigen::Index> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const ResolvedAfgWeights w = config.weights.at(epoch);
    rng.shuffle(order);
    LossBreakdown epoch_loss;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const auto b = static_cast<Eigen::Index>(end - start);
      AfgBatch batch{Matrix(b, semantic.cols()), Matrix(b, visual.cols())};
      for (Eigen::Index r = 0; r < b; ++r) {
        const Eigen::Index src = order[start + static_cast<std::size_t>(r)];
        batch.semantic.row(r) = semantic.row(src);
        batch.visual.row(r) = visual.row(src);
      }
      AfgNoise noise{rng.normal_matrix(b, d), rng.normal_matrix(b, d)};
      grads.zero();
      const LossBreakdown loss = afg_objective(model.nets_, batch, noise, w, &grads);
      if (!std::isfinite(loss.total))
        fail(ErrorCode::kNumeric, "AFG loss is not finite at epoch " + std::to_string(epoch) +
                                      ", batch " + std::to_string(batches));
      optim.step(params, grad_spans);
      epoch_loss.accumulate(loss);
      ++batches;
    }
    epoch_loss.scale(1.0 / static_cast<double>(batches));
    model.history_.push_back(std::move(epoch_loss));
  }
  for (MlpNet* n : {&model.nets_.e_sem, &model.nets_.d_sem, &model.nets_.e_vis, &model.nets_.d_vis})
    n->round_parameters_to_float();
  return model;
}

}  // namespace dfs
