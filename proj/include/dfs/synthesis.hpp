#pragma once

#include "dfs/afg.hpp"
#include "dfs/dataset.hpp"
#include "dfs/sfg.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <vector>

namespace dfs {

enum class Provenance : std::uint8_t {
  kSeenPosterior = 0,            // sampled from E2's posterior of a real seen feature
  kUnseenDecoded = 1,            // D3(noise | condition)
  kUnseenSemanticPosterior = 2,  // baseline: sampled from E1's posterior of the embedding
};

enum class SeenSource {
  kPosteriorSample,  // draw a random TRAIN feature of the class, sample N(mu2, sigma2)
  kEncodedMean,      // mu2 of every TRAIN feature of the class, once each
};

struct SynthesisPlan {
  std::size_t per_seen_class_count = 200;
  std::size_t per_unseen_class_count = 400;
  SeenSource seen_source = SeenSource::kPosteriorSample;
  std::uint64_t seed = 0;

  void validate() const;
};

// Feature rows in the aligned space with labels and where each row came from.
struct SynthesizedSet {
  Matrix features;
  std::vector<int> labels;
  std::vector<Provenance> provenance;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(features.cols()); }
  void validate() const;
};

SynthesizedSet synthesize_seen(const AfgModel& afg, const DatasetAccess& data,
                               const SynthesisPlan& plan);

// For each unseen class: condition from its embedding, then D3(noise | condition)
// for per_unseen_class_count standard-normal noises. Reads no visual features.
SynthesizedSet synthesize_unseen(const AfgModel& afg, const SfgModel& sfg,
                                 const DatasetAccess& data, const SynthesisPlan& plan);

// Baseline generator: samples N(mu1, sigma1) of each unseen class embedding.
SynthesizedSet synthesize_unseen_baseline(const AfgModel& afg, const DatasetAccess& data,
                                          const SynthesisPlan& plan);

// Per class: trace of the unbiased sample covariance of its rows. Throws
// kInvalidArgument for a class with fewer than two rows.
std::map<int, double> diversity_score(const SynthesizedSet& set);
double mean_score(const std::map<int, double>& scores);

// Seen block then unseen block, each stably sorted by class.
SynthesizedSet build_classifier_trainset(const SynthesizedSet& seen, const SynthesizedSet& unseen);

// Same manifest format as datasets, with features/labels/provenance blobs.
void save_synthesized(const SynthesizedSet& set, const std::filesystem::path& manifest_path);
SynthesizedSet load_synthesized(const std::filesystem::path& manifest_path);

}  // namespace dfs
