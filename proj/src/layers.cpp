#include "deim/layers.hpp"

#include <cmath>

#include "deim/errors.hpp"

namespace deim {

std::vector<double> mask_weights(std::span<const std::uint8_t> mask) {
  std::vector<double> w(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) w[i] = mask[i] ? 1.0 : 0.0;
  return w;
}

std::vector<std::uint8_t> cross_keep(std::span<const std::uint8_t> rows, std::span<const std::uint8_t> cols) {
  std::vector<std::uint8_t> keep(rows.size() * cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) keep[i * cols.size() + j] = rows[i] && cols[j];
  return keep;
}

Tensor glorot(Shape shape, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::vector<double> v(numel(shape));
  for (double& x : v) x = rng.uniform(-limit, limit);
  return Tensor(std::move(shape), std::move(v), true);
}

}  // namespace deim
