#pragma once

#include "dfs/afg.hpp"
#include "dfs/classifier.hpp"
#include "dfs/dataset.hpp"
#include "dfs/sfg.hpp"
#include "dfs/synthesis.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace dfs {

struct TrainConfig {
  AfgConfig afg;
  SfgConfig sfg;
};

struct EvalConfig {
  SynthesisPlan plan;
  ClassifierConfig classifier;
};

// Settings for the default synthetic benchmark: larger steps and weaker KL and
// alignment weights than the defaults, which suit high-dimensional features.
TrainConfig synthetic_preset();

// Sets every stage seed to the same run seed.
void apply_seed(TrainConfig& config, std::uint64_t seed);
void apply_seed(EvalConfig& config, std::uint64_t seed);

// Stable hex digest of every training setting.
std::string config_fingerprint(const TrainConfig& config);

struct TrainedModels {
  AfgModel afg;
  SfgModel sfg;
};

// Stage 1, then stage 2 with the AFG frozen.
TrainedModels train_models(const DatasetAccess& data, const TrainConfig& config);

enum class Generator { kDfs, kBaseline };
std::string_view to_string(Generator g);

// Synthesizes the classifier training set with the chosen unseen-class
// generator, trains the classifier and evaluates on the TEST split.
EvalReport run_evaluation(const AfgModel& afg, const SfgModel& sfg, const DatasetAccess& data,
                          Generator generator, const EvalConfig& config,
                          const std::string& fingerprint = {});

// One row per epoch per stage; columns not used by a stage are left empty.
void write_loss_history(const AfgModel& afg, const SfgModel& sfg,
                        const std::filesystem::path& csv_path);

}  // namespace dfs
