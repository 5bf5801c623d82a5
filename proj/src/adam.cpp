#include "deim/adam.hpp"

#include <cmath>
#include <string>

#include "deim/errors.hpp"

namespace deim {

void adam_update(std::span<double> params, std::span<const double> grads, AdamMoments& moments, std::size_t step,
                 const AdamOptions& o) {
  if (params.size() != grads.size() || moments.m.size() != params.size()) {
    throw DimensionError("adam_update: " + std::to_string(params.size()) + " params, " +
                         std::to_string(grads.size()) + " grads, " + std::to_string(moments.m.size()) + " moments");
  }
  if (step == 0) throw ConfigError("adam_update: step is 1-based");
  const double t = static_cast<double>(step);
  const double correct1 = 1.0 - std::pow(o.beta1, t);
  const double correct2 = 1.0 - std::pow(o.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    moments.m[i] = o.beta1 * moments.m[i] + (1.0 - o.beta1) * g;
    moments.v[i] = o.beta2 * moments.v[i] + (1.0 - o.beta2) * g * g;
    const double m_hat = moments.m[i] / correct1;
    const double v_hat = moments.v[i] / correct2;
    params[i] -= o.lr * m_hat / (std::sqrt(v_hat) + o.eps);
  }
}

Adam::Adam(AdamOptions options, const std::vector<std::size_t>& sizes) : options_(options) {
  moments_.reserve(sizes.size());
  for (std::size_t n : sizes) moments_.emplace_back(n);
}

void Adam::step(const std::vector<std::span<double>>& params, const std::vector<std::span<const double>>& grads) {
  if (params.size() != moments_.size() || grads.size() != moments_.size()) {
    throw DimensionError("Adam::step: tensor count does not match the optimizer");
  }
  ++step_;
  for (std::size_t k = 0; k < params.size(); ++k) adam_update(params[k], grads[k], moments_[k], step_, options_);
}

double clip_global_norm(const std::vector<std::span<double>>& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& g : grads)
    for (double x : g) sq += x * x;
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double factor = max_norm / norm;
    for (const auto& g : grads)
      for (double& x : g) x *= factor;
  }
  return norm;
}

}  // namespace deim
