#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace dfs {

// A parameter block to perturb, and where the loss writes its analytic
// gradient.
struct ParamBlock {
  std::string name;
  std::span<double> value;
  std::span<const double> grad;
};

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  // Denominator floor, relative to max(1, |loss|); keeps coordinates whose
  // true gradient is zero from dividing round-off by ~0.
  double floor_scale = 1e-6;
  // A mismatch is retried at step/10, step/100, ... this many times, since a
  // ReLU or L1 kink inside the stencil only breaks the larger steps.
  int refinements = 2;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  // Coordinates sitting on a kink (one-sided slopes disagree at every step
  // size); the subgradient is not comparable to a difference quotient there.
  std::size_t skipped = 0;
  bool passed = true;
  std::string worst_block;
  std::size_t worst_index = 0;
  std::vector<std::string> notes;
};

// eval(want_grad) returns the loss at the current parameter values; when
// want_grad is true it must also write the analytic gradient into every
// block's grad span. Parameters are restored before returning.
using LossEval = std::function<double(bool want_grad)>;

GradCheckReport grad_check(const LossEval& eval, std::span<const ParamBlock> blocks,
                           const GradCheckOptions& options = {});

double relative_error(double analytic, double numeric, double floor);

}  // namespace dfs
