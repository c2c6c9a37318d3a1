#pragma once

#include "dfs/rng.hpp"
#include "dfs/types.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace dfs {

enum class Activation { kRelu, kIdentity };

struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;    // out
};

// Activations recorded by a forward pass, consumed by backward().
struct ForwardCache {
  std::vector<Matrix> inputs;       // input to each layer
  std::vector<Matrix> pre_activations;

  bool empty() const { return inputs.empty(); }
  void clear() {
    inputs.clear();
    pre_activations.clear();
  }
};

class MlpNet;

// Parameter gradients with the same layout as an MlpNet. backward() adds into
// these, so a net applied several times in one loss accumulates naturally.
struct MlpGradients {
  std::vector<Matrix> weight;
  std::vector<Vector> bias;

  MlpGradients() = default;
  explicit MlpGradients(const MlpNet& net);

  void zero();
  std::vector<std::span<double>> spans();
};

// Fully-connected network: affine layers with a hidden activation between
// them and an identity output. Forward and backward are const, so a trained
// net can be shared across threads; the per-call state lives in ForwardCache.
class MlpNet {
 public:
  MlpNet() = default;
  // All weights and biases zero.
  explicit MlpNet(std::vector<std::size_t> layer_sizes,
                  Activation hidden = Activation::kRelu);

  // Weights and biases uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], rounded to
  // single precision.
  static MlpNet uniform_init(std::vector<std::size_t> layer_sizes, RngStream& rng,
                             Activation hidden = Activation::kRelu);

  const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
  std::size_t input_dim() const { return sizes_.front(); }
  std::size_t output_dim() const { return sizes_.back(); }
  std::size_t num_layers() const { return layers_.size(); }
  Activation hidden_activation() const { return hidden_; }

  const DenseLayer& layer(std::size_t i) const { return layers_.at(i); }
  DenseLayer& layer(std::size_t i) { return layers_.at(i); }

  // x: batch x input_dim. When cache is non-null it is overwritten.
  Matrix forward(const Matrix& x, ForwardCache* cache = nullptr) const;
  Vector forward(const Vector& x) const;

  // Accumulates dLoss/dparams into grads and returns dLoss/dinput.
  // upstream: batch x output_dim gradient of the loss w.r.t. the output.
  Matrix backward(const ForwardCache& cache, const Matrix& upstream,
                  MlpGradients& grads) const;

  std::size_t parameter_count() const;
  std::vector<std::span<double>> parameter_spans();

  void round_parameters_to_float();

  // Bitwise parameter equality.
  bool operator==(const MlpNet& other) const;

 private:
  std::vector<std::size_t> sizes_;
  std::vector<DenseLayer> layers_;
  Activation hidden_ = Activation::kRelu;
};

std::vector<std::size_t> layer_sizes(std::size_t in, const std::vector<std::size_t>& hidden,
                                     std::size_t out);

}  // namespace dfs
