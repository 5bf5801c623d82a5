#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace deim {

struct AdamOptions {
  double lr = 0.0005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First and second moment buffers for one parameter tensor.
struct AdamMoments {
  std::vector<double> m;
  std::vector<double> v;

  explicit AdamMoments(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

/// In-place bias-corrected Adam update for time step `step` (1-based).
void adam_update(std::span<double> params, std::span<const double> grads, AdamMoments& moments, std::size_t step,
                 const AdamOptions& options);

/// Adam over a fixed list of parameter tensors.
class Adam {
 public:
  Adam(AdamOptions options, const std::vector<std::size_t>& sizes);

  /// Advances the step counter and updates every tensor.
  void step(const std::vector<std::span<double>>& params, const std::vector<std::span<const double>>& grads);

  std::size_t steps() const { return step_; }
  void set_steps(std::size_t s) { step_ = s; }
  const AdamOptions& options() const { return options_; }
  std::vector<AdamMoments>& moments() { return moments_; }
  const std::vector<AdamMoments>& moments() const { return moments_; }

 private:
  AdamOptions options_;
  std::vector<AdamMoments> moments_;
  std::size_t step_ = 0;
};

/// Scales every gradient so their joint L2 norm is at most max_norm.
/// Returns the norm before scaling. max_norm <= 0 leaves them unchanged.
double clip_global_norm(const std::vector<std::span<double>>& grads, double max_norm);

}  // namespace deim
