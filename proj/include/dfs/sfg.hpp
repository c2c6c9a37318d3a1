#pragma once

#include "dfs/afg.hpp"

#include <optional>
#include <string_view>

namespace dfs {

// What D3 and E3 are conditioned on.
enum class ConditionMode {
  kRawSemantic,  // the class embedding a itself
  kSampledZ1,    // z1 ~ N(mu1, sigma1), redrawn per use
  kMeanZ1,       // z1 = mu1
};

std::string_view to_string(ConditionMode mode);
// Accepts "raw", "sampled", "mean".
ConditionMode parse_condition_mode(std::string_view name);

struct SfgConfig {
  // Defaults to the aligned dimension.
  std::optional<std::size_t> latent_dim;
  std::vector<std::size_t> encoder_hidden{64};
  std::vector<std::size_t> decoder_hidden{64};
  double beta2 = 0.6;
  int epochs = 100;
  std::size_t batch_size = 32;
  AdamConfig optimizer;
  ConditionMode condition = ConditionMode::kMeanZ1;
  std::uint64_t seed = 0;

  void validate() const;

  // One hidden layer of 1990 (E3) and 1560 (D3) units.
  static SfgConfig full_scale();
};

class SfgModel {
 public:
  SfgModel() = default;
  SfgModel(SfgNets nets, std::size_t aligned_dim, std::size_t latent_dim, ConditionMode mode);

  const SfgNets& nets() const { return nets_; }
  SfgNets& mutable_nets() { return nets_; }
  std::size_t aligned_dim() const { return aligned_dim_; }
  std::size_t latent_dim() const { return latent_dim_; }
  std::size_t condition_dim() const { return nets_.d3.input_dim() - latent_dim_; }
  ConditionMode condition_mode() const { return mode_; }
  const std::vector<LossBreakdown>& history() const { return history_; }

  // E3(condition | z2).
  GaussianBatch encode(const Matrix& condition, const Matrix& z2) const;
  // D3(noise | condition); rows are samples.
  Matrix decode(const Matrix& noise, const Matrix& condition) const;

 private:
  friend SfgModel train_sfg(const DatasetAccess&, const AfgModel&, const SfgConfig&);

  SfgNets nets_;
  std::size_t aligned_dim_ = 0;
  std::size_t latent_dim_ = 0;
  ConditionMode mode_ = ConditionMode::kMeanZ1;
  std::vector<LossBreakdown> history_;
};

// Conditions for the given class embeddings (one per row).
Matrix condition_rows(const AfgModel& afg, const Matrix& semantic_rows, ConditionMode mode,
                      RngStream& rng);

SfgModel init_sfg(const AfgModel& afg, const SfgConfig& config);

// Trains E3/D3 on aligned pairs of TRAIN samples with the AFG frozen. Throws
// kState for an untrained AFG.
SfgModel train_sfg(const DatasetAccess& data, const AfgModel& afg, const SfgConfig& config);

// Encode (z1, z2), sample z3, decode. z1 must already be a condition vector.
Vector sfg_reconstruct(const SfgModel& sfg, const Vector& z1, const Vector& z2, RngStream& rng);

}  // namespace dfs
