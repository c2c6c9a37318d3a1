#include "dfs/mlp.hpp"

#include "dfs/error.hpp"

#include <cmath>
#include <cstring>
#include <string>

namespace dfs {

namespace {

void check_sizes(const std::vector<std::size_t>& sizes) {
  require(sizes.size() >= 2, ErrorCode::kInvalidArgument,
          "MlpNet needs at least an input and an output size");
  for (std::size_t s : sizes)
    require(s > 0, ErrorCode::kInvalidArgument, "MlpNet layer sizes must be positive");
}

}  // namespace

std::vector<std::size_t> layer_sizes(std::size_t in, const std::vector<std::size_t>& hidden,
                                     std::size_t out) {
  std::vector<std::size_t> sizes;
  sizes.reserve(hidden.size() + 2);
  sizes.push_back(in);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

MlpGradients::MlpGradients(const MlpNet& net) {
  for (std::size_t i = 0; i < net.num_layers(); ++i) {
    const DenseLayer& l = net.layer(i);
    weight.push_back(Matrix::Zero(l.weight.rows(), l.weight.cols()));
    bias.push_back(Vector::Zero(l.bias.size()));
  }
}

void MlpGradients::zero() {
  for (auto& w : weight) w.setZero();
  for (auto& b : bias) b.setZero();
}

std::vector<std::span<double>> MlpGradients::spans() {
  std::vector<std::span<double>> out;
  for (std::size_t i = 0; i < weight.size(); ++i) {
    out.push_back(as_span(weight[i]));
    out.push_back(as_span(bias[i]));
  }
  return out;
}

MlpNet::MlpNet(std::vector<std::size_t> sizes, Activation hidden)
    : sizes_(std::move(sizes)), hidden_(hidden) {
  check_sizes(sizes_);
  for (std::size_t i = 0; i + 1 < sizes_.size(); ++i) {
    const auto in = static_cast<Eigen::Index>(sizes_[i]);
    const auto out = static_cast<Eigen::Index>(sizes_[i + 1]);
    layers_.push_back({Matrix::Zero(out, in), Vector::Zero(out)});
  }
}

MlpNet MlpNet::uniform_init(std::vector<std::size_t> sizes, RngStream& rng, Activation hidden) {
  MlpNet net(std::move(sizes), hidden);
  for (DenseLayer& l : net.layers_) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(l.weight.cols()));
    for (Eigen::Index i = 0; i < l.weight.rows(); ++i)
      for (Eigen::Index j = 0; j < l.weight.cols(); ++j) l.weight(i, j) = rng.uniform(-bound, bound);
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias(i) = rng.uniform(-bound, bound);
  }
  net.round_parameters_to_float();
  return net;
}

Matrix MlpNet::forward(const Matrix& x, ForwardCache* cache) const {
  require(!layers_.empty(), ErrorCode::kState, "forward on an empty MlpNet");
  if (x.cols() != static_cast<Eigen::Index>(input_dim()))
    fail(ErrorCode::kDimensionMismatch, "MlpNet input has " + std::to_string(x.cols()) +
                                            " columns, expected " + std::to_string(input_dim()));
  if (cache) cache->clear();
  Matrix h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const DenseLayer& l = layers_[i];
    Matrix pre = h * l.weight.transpose();
    pre.rowwise() += l.bias.transpose();
    if (cache) {
      cache->inputs.push_back(std::move(h));
      cache->pre_activations.push_back(pre);
    }
    const bool last = i + 1 == layers_.size();
    if (!last && hidden_ == Activation::kRelu)
      h = pre.cwiseMax(0.0);
    else
      h = std::move(pre);
  }
  return h;
}

Vector MlpNet::forward(const Vector& x) const {
  Matrix row = x.transpose();
  return forward(row).row(0).transpose();
}

Matrix MlpNet::backward(const ForwardCache& cache, const Matrix& upstream,
                        MlpGradients& grads) const {
  require(!cache.empty() && cache.inputs.size() == layers_.size(), ErrorCode::kState,
          "MlpNet::backward called without a cached forward pass");
  require(grads.weight.size() == layers_.size(), ErrorCode::kState,
          "gradient buffer does not match network");
  const Eigen::Index batch = cache.inputs.front().rows();
  if (upstream.rows() != batch || upstream.cols() != static_cast<Eigen::Index>(output_dim()))
    fail(ErrorCode::kDimensionMismatch, "upstream gradient shape does not match forward output");

  Matrix delta = upstream;
  for (std::size_t k = layers_.size(); k-- > 0;) {
    const bool last = k + 1 == layers_.size();
    if (!last && hidden_ == Activation::kRelu)
      delta = (cache.pre_activations[k].array() > 0.0).select(delta, 0.0);
    grads.weight[k].noalias() += delta.transpose() * cache.inputs[k];
    grads.bias[k] += delta.colwise().sum().transpose();
    delta = delta * layers_[k].weight;
  }
  return delta;
}

std::size_t MlpNet::parameter_count() const {
  std::size_t n = 0;
  for (const DenseLayer& l : layers_) n += l.weight.size() + l.bias.size();
  return n;
}

std::vector<std::span<double>> MlpNet::parameter_spans() {
  std::vector<std::span<double>> out;
  for (DenseLayer& l : layers_) {
    out.push_back(as_span(l.weight));
    out.push_back(as_span(l.bias));
  }
  return out;
}

void MlpNet::round_parameters_to_float() {
  for (DenseLayer& l : layers_) {
    round_to_float(l.weight);
    round_to_float(l.bias);
  }
}

bool MlpNet::operator==(const MlpNet& other) const {
  if (sizes_ != other.sizes_ || hidden_ != other.hidden_) return false;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const DenseLayer& a = layers_[i];
    const DenseLayer& b = other.layers_[i];
    if (std::memcmp(a.weight.data(), b.weight.data(), sizeof(double) * a.weight.size()) != 0)
      return false;
    if (std::memcmp(a.bias.data(), b.bias.data(), sizeof(double) * a.bias.size()) != 0)
      return false;
  }
  return true;
}

}  // namespace dfs
