#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "deim/ops.hpp"
#include "deim/rng.hpp"
#include "deim/tensor.hpp"

namespace deim {

/// Training-mode switches threaded through a forward pass.
struct ForwardContext {
  bool training = false;
  double dropout = 0.0;
  Rng* rng = nullptr;

  Tensor drop(const Tensor& x) const {
    if (!training || dropout <= 0.0 || rng == nullptr) return x;
    return deim::dropout(x, dropout, *rng);
  }
};

using NamedTensor = std::pair<std::string, Tensor>;

/// 0/1 position flags as a double vector usable with mask_rows.
std::vector<double> mask_weights(std::span<const std::uint8_t> mask);

/// n x m keep-flags: cell (i, j) is kept iff both positions are unmasked.
std::vector<std::uint8_t> cross_keep(std::span<const std::uint8_t> rows, std::span<const std::uint8_t> cols);

/// Glorot-uniform matrix (fan_in x fan_out) requiring grad.
Tensor glorot(Shape shape, std::size_t fan_in, std::size_t fan_out, Rng& rng);

}  // namespace deim
