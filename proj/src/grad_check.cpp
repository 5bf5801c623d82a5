#include "deim/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "deim/errors.hpp"
#include "deim/ops.hpp"
#include "deim/rng.hpp"

namespace deim {

namespace {

double reduce(const Tensor& out, std::span<const double> weights) {
  const auto v = out.values();
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) total += v[i] * weights[i];
  return total;
}

void require_finite(double value, std::size_t input, std::size_t index) {
  if (!std::isfinite(value)) {
    throw NumericalError("grad_check: non-finite value at input " + std::to_string(input) +
                         ", coordinate " + std::to_string(index));
  }
}

}  // namespace

GradCheckReport grad_check(const DifferentiableFn& fn, std::span<const Tensor> inputs,
                           const GradCheckOptions& options) {
  std::vector<Tensor> leaves;
  leaves.reserve(inputs.size());
  for (const auto& in : inputs) leaves.push_back(in.detach().set_requires_grad(true));

  Tensor out = fn(leaves);
  Rng rng(options.seed);
  std::vector<double> weights(out.numel());
  for (double& w : weights) w = rng.uniform(-1.0, 1.0);
  for (std::size_t i = 0; i < out.numel(); ++i) require_finite(out.values()[i], 0, i);

  Tensor objective = out.numel() == 1 ? scale(out, weights[0]) : sum(mul_constant(out, weights));
  objective.backward();

  GradCheckReport report;
  NoGradGuard no_grad;
  for (std::size_t k = 0; k < leaves.size(); ++k) {
    Tensor& leaf = leaves[k];
    const std::size_t n = leaf.numel();
    std::vector<std::size_t> coords(n);
    std::iota(coords.begin(), coords.end(), 0);
    if (options.max_coords_per_input && options.max_coords_per_input < n) {
      shuffle(coords, rng);
      coords.resize(options.max_coords_per_input);
      std::sort(coords.begin(), coords.end());
    }
    auto values = leaf.mutable_values();
    for (std::size_t idx : coords) {
      const double original = values[idx];
      values[idx] = original + options.step;
      const double plus = reduce(fn(leaves), weights);
      values[idx] = original - options.step;
      const double minus = reduce(fn(leaves), weights);
      values[idx] = original;
      require_finite(plus, k, idx);
      require_finite(minus, k, idx);

      const double numeric = (plus - minus) / (2.0 * options.step);
      const double analytic = leaf.has_grad() ? leaf.grad()[idx] : 0.0;
      require_finite(analytic, k, idx);
      const double denom = std::max({std::abs(analytic), std::abs(numeric), options.abs_floor});
      const double err = std::abs(analytic - numeric) / denom;
      ++report.coords_checked;
      if (err > report.max_rel_error) {
        report.max_rel_error = err;
        report.worst_input = k;
        report.worst_index = idx;
        report.worst_analytic = analytic;
        report.worst_numeric = numeric;
      }
    }
  }
  report.passed = report.max_rel_error <= options.tolerance;
  if (!report.passed) {
    // One-sided slopes at the worst coordinate tell a kink inside the
    // stencil apart from a wrong gradient.
    auto values = leaves[report.worst_input].mutable_values();
    const std::size_t idx = report.worst_index;
    const double original = values[idx];
    const double base = reduce(fn(leaves), weights);
    values[idx] = original + options.step;
    const double plus = reduce(fn(leaves), weights);
    values[idx] = original - options.step;
    const double minus = reduce(fn(leaves), weights);
    values[idx] = original;
    report.worst_right_slope = (plus - base) / options.step;
    report.worst_left_slope = (base - minus) / options.step;
    const auto rel = [&](double a, double b) {
      return std::abs(a - b) / std::max({std::abs(a), std::abs(b), options.abs_floor});
    };
    const double a = report.worst_analytic;
    const double one_sided_tol = std::max(options.tolerance, 10.0 * options.step);
    report.kink_suspected = rel(report.worst_left_slope, report.worst_right_slope) > one_sided_tol &&
                            (rel(report.worst_left_slope, a) <= one_sided_tol ||
                             rel(report.worst_right_slope, a) <= one_sided_tol);
  }
  return report;
}

}  // namespace deim
