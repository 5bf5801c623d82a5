#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "deim/tensor.hpp"

namespace deim {

struct GradCheckOptions {
  double tolerance = 1e-4;  // on the relative error below
  double step = 1e-5;       // central-difference half width
  // Denominator floor: err = |analytic - numeric| / max(|analytic|, |numeric|, abs_floor).
  // Keeps near-zero gradients from turning round-off into huge ratios.
  double abs_floor = 1e-6;
  // 0 checks every coordinate; otherwise a seeded sample of this many per input.
  std::size_t max_coords_per_input = 0;
  std::uint64_t seed = 0x5eed;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t worst_input = 0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coords_checked = 0;
  bool passed = true;
  // Filled only on failure: one-sided slopes at the worst coordinate. A kink
  // is suspected when they disagree with each other but one of them agrees
  // with the analytic gradient.
  double worst_left_slope = 0.0;
  double worst_right_slope = 0.0;
  bool kink_suspected = false;
};

using DifferentiableFn = std::function<Tensor(std::span<const Tensor>)>;

/// Compares reverse-mode gradients of fn at `inputs` against central finite
/// differences, coordinate by coordinate. A non-scalar output is reduced to
/// a scalar through a fixed random linear functional first, so every output
/// entry contributes. Throws NumericalError naming the input and coordinate
/// when fn produces a non-finite value.
GradCheckReport grad_check(const DifferentiableFn& fn, std::span<const Tensor> inputs,
                           const GradCheckOptions& options = {});

}  // namespace deim
