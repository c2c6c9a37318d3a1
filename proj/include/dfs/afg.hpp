#pragma once

#include "dfs/dataset.hpp"
#include "dfs/gaussian.hpp"
#include "dfs/losses.hpp"
#include "dfs/mlp.hpp"
#include "dfs/optim.hpp"

#include <cstdint>
#include <vector>

namespace dfs {

struct AfgConfig {
  std::size_t aligned_dim = 16;
  std::vector<std::size_t> sem_encoder_hidden{64};
  std::vector<std::size_t> sem_decoder_hidden{64};
  std::vector<std::size_t> vis_encoder_hidden{64};
  std::vector<std::size_t> vis_decoder_hidden{64};
  int epochs = 100;
  std::size_t batch_size = 32;
  AdamConfig optimizer;
  AfgLossWeights weights;
  std::uint64_t seed = 0;

  void validate() const;

  // Full-scale settings for fine-grained feature sets (aligned dim 256).
  static AfgConfig fine_grained();
};

// Stage-1 model: semantic (E1/D1) and visual (E2/D2) VAEs sharing an aligned
// space. Immutable once trained.
class AfgModel {
 public:
  AfgModel() = default;
  AfgModel(AfgNets nets, std::size_t aligned_dim, bool trained);

  const AfgNets& nets() const { return nets_; }
  AfgNets& mutable_nets() { return nets_; }
  std::size_t aligned_dim() const { return aligned_dim_; }
  std::size_t semantic_dim() const { return nets_.e_sem.input_dim(); }
  std::size_t visual_dim() const { return nets_.e_vis.input_dim(); }
  bool trained() const { return trained_; }
  const std::vector<LossBreakdown>& history() const { return history_; }

  GaussianParams encode_semantic(const Vector& a) const;
  GaussianParams encode_visual(const Vector& v) const;
  GaussianBatch encode_semantic(const Matrix& rows) const;
  GaussianBatch encode_visual(const Matrix& rows) const;

  // FNV-1a over every parameter, for frozen-stage checks.
  std::uint64_t parameter_hash() const;

 private:
  friend AfgModel train_afg(const DatasetAccess&, const AfgConfig&);

  AfgNets nets_;
  std::size_t aligned_dim_ = 0;
  bool trained_ = false;
  std::vector<LossBreakdown> history_;
};

// Randomly initialized, untrained model.
AfgModel init_afg(std::size_t semantic_dim, std::size_t visual_dim, const AfgConfig& config);

// Minimizes the AFG objective over (visual feature, class embedding) pairs of
// the TRAIN split. Only seen-class data is read. Records one LossBreakdown per
// epoch (mean over that epoch's batches). Final parameters are rounded to
// single precision so checkpoints reproduce them exactly.
AfgModel train_afg(const DatasetAccess& data, const AfgConfig& config);

}  // namespace dfs
