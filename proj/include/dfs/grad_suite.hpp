#pragma once

#include "dfs/grad_check.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dfs {

struct GradSuiteOptions {
  std::uint64_t seed = 0;
  int instances = 10;
  std::size_t max_dim = 16;
  GradCheckOptions check;
  // Negates the analytic gradient of the named loss, to show the check bites.
  std::string sign_flip_target;
  // Runs only the L1 loss at inputs with exact ties, on a dyadic grid so the
  // remaining coordinates are exact; the step is forced to 2^-16.
  bool tie_point = false;
};

struct GradSuiteResult {
  std::string loss;
  int instances = 0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
  double max_rel_error = 0.0;
  bool passed = true;
  std::vector<std::string> notes;
};

// kl, l1, vae, da, ca, cvae, afg.
const std::vector<std::string>& gradient_suite_losses();

std::vector<GradSuiteResult> run_gradient_suite(const GradSuiteOptions& options);

}  // namespace dfs
