#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string_view>

#include "deim/rng.hpp"
#include "deim/tensor.hpp"

namespace deim {

// Differentiable tensor operations. Matrices are row-major with sequences
// laid out as rows (len x dim). Every op throws DimensionError naming the
// offending shapes when its operands are incompatible.

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor add_scalar(const Tensor& a, double offset);
/// a (r x c) plus bias (c elements) broadcast over rows.
Tensor add_bias(const Tensor& a, const Tensor& bias);

Tensor relu(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor sigmoid(const Tensor& a);

/// Max-shifted softmax along `axis`. A slice that is entirely -inf (every
/// position masked) yields the uniform distribution and passes no gradient.
Tensor softmax(const Tensor& x, std::size_t axis);

Tensor concat(std::span<const Tensor> parts, std::size_t axis);
Tensor concat(std::initializer_list<Tensor> parts, std::size_t axis);

Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t end);
/// Repeats a 1 x c row n times.
Tensor tile_rows(const Tensor& row, std::size_t n);
/// Per-row maximum of an r x c matrix, as r x 1. Gradient goes to the first
/// maximal entry.
Tensor row_max(const Tensor& x);
/// Sum of every element, as a one-element tensor.
Tensor sum(const Tensor& x);
/// log(max(x, floor)); gradient is zero where the clamp is active.
Tensor log_clamped(const Tensor& x, double floor);

/// Same-padded 1-D cross-correlation along the rows of x (len x d_in) with
/// kernels shaped (width x d_in x d_out). Width must be odd.
Tensor conv1d(const Tensor& x, const Tensor& kernels);

/// Scales row t of x by mask[t] (a constant).
Tensor mask_rows(const Tensor& x, std::span<const double> mask);
/// Replaces entries whose keep flag is 0 by `fill`; no gradient flows there.
Tensor masked_fill(const Tensor& x, std::span<const std::uint8_t> keep, double fill);
/// Elementwise product with a constant array of the same size.
Tensor mul_constant(const Tensor& x, std::span<const double> factors);
/// Inverted dropout: zeroes each entry with probability `rate` and scales
/// survivors by 1/(1-rate). rate == 0 returns x unchanged.
Tensor dropout(const Tensor& x, double rate, Rng& rng);

/// Mean / max over rows whose mask is 1, as 1 x c.
Tensor masked_mean_rows(const Tensor& x, std::span<const double> mask);
Tensor masked_max_rows(const Tensor& x, std::span<const double> mask);

/// Name-dispatched pointwise ops: relu, tanh, sigmoid (one operand),
/// add, sub, mul (two operands), concat (any number, along `axis`).
Tensor elementwise(std::string_view name, std::span<const Tensor> operands, std::size_t axis = 0);

}  // namespace deim
