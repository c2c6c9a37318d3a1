#pragma once

#include "dfs/afg.hpp"
#include "dfs/sfg.hpp"

#include <filesystem>
#include <string>

namespace dfs {

struct Checkpoint {
  AfgModel afg;
  SfgModel sfg;
  std::string config_fingerprint;
};

// Manifest with layer sizes, dimensions, condition mode and fingerprint, plus
// one float32 blob per weight matrix and bias vector.
void save_checkpoint(const AfgModel& afg, const SfgModel& sfg,
                     const std::string& config_fingerprint,
                     const std::filesystem::path& manifest_path);
Checkpoint load_checkpoint(const std::filesystem::path& manifest_path);

}  // namespace dfs
