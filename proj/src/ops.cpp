#include "deim/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "deim/errors.hpp"

namespace deim {

namespace {

using detail::Node;
using BackwardFn = std::function<void(Node&)>;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool wants_tape(std::span<const Tensor> inputs) {
  if (!grad_enabled()) return false;
  return std::any_of(inputs.begin(), inputs.end(), [](const Tensor& t) { return t.requires_grad(); });
}

Tensor make_op(const char* op, Shape shape, std::vector<double> out, std::vector<Tensor> inputs,
               BackwardFn fn) {
  Tensor result(std::move(shape), std::move(out));
  if (!wants_tape(inputs)) return result;
  Node& node = *result.node();
  node.requires_grad = true;
  node.op = op;
  node.parents.reserve(inputs.size());
  for (const auto& in : inputs) node.parents.push_back(in.node());
  node.backward_fn = std::move(fn);
  return result;
}

// Grad buffer of parent i, or nullptr when it does not take gradients.
std::vector<double>* parent_grad(Node& self, std::size_t i) {
  Node& p = *self.parents[i];
  return p.requires_grad ? &p.ensure_grad() : nullptr;
}

const std::vector<double>& parent_value(const Node& self, std::size_t i) {
  return *self.parents[i]->value;
}

void require_matrix(const Tensor& t, const char* what) {
  if (t.rank() != 2) {
    throw DimensionError(std::string(what) + ": expected a matrix, got " + to_string(t.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(what) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                         to_string(b.shape()));
  }
}

template <typename Forward, typename Derivative>
Tensor unary(const Tensor& a, const char* op, Forward f, Derivative df) {
  const auto in = a.values();
  std::vector<double> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = f(in[i]);
  return make_op(op, a.shape(), std::move(out), {a}, [df](Node& self) {
    auto* g = parent_grad(self, 0);
    if (!g) return;
    const auto& x = parent_value(self, 0);
    const auto& y = *self.value;
    for (std::size_t i = 0; i < y.size(); ++i) (*g)[i] += self.grad[i] * df(x[i], y[i]);
  });
}

// Decomposes a shape around `axis` into (outer, length, inner) extents.
struct AxisView {
  std::size_t outer = 1;
  std::size_t length = 1;
  std::size_t inner = 1;
};

AxisView axis_view(const Shape& shape, std::size_t axis) {
  if (axis >= shape.size()) {
    throw DimensionError("axis " + std::to_string(axis) + " out of range for " + to_string(shape));
  }
  AxisView v;
  for (std::size_t i = 0; i < axis; ++i) v.outer *= shape[i];
  v.length = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) v.inner *= shape[i];
  return v;
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  const std::size_t r = a.rows();
  const std::size_t k = a.cols();
  const std::size_t c = b.cols();
  if (b.rows() != k) {
    throw DimensionError("matmul: inner extents differ, " + to_string(a.shape()) + " x " +
                         to_string(b.shape()));
  }
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<double> out(r * c, 0.0);
  for (std::size_t i = 0; i < r; ++i) {
    double* row = out.data() + i * c;
    for (std::size_t p = 0; p < k; ++p) {
      const double s = av[i * k + p];
      if (s == 0.0) continue;
      const double* brow = bv.data() + p * c;
      for (std::size_t j = 0; j < c; ++j) row[j] += s * brow[j];
    }
  }
  return make_op("matmul", {r, c}, std::move(out), {a, b}, [r, k, c](Node& self) {
    const auto& av = parent_value(self, 0);
    const auto& bv = parent_value(self, 1);
    const auto& dy = self.grad;
    if (auto* ga = parent_grad(self, 0)) {
      for (std::size_t i = 0; i < r; ++i) {
        const double* dyrow = dy.data() + i * c;
        for (std::size_t p = 0; p < k; ++p) {
          const double* brow = bv.data() + p * c;
          double acc = 0.0;
          for (std::size_t j = 0; j < c; ++j) acc += dyrow[j] * brow[j];
          (*ga)[i * k + p] += acc;
        }
      }
    }
    if (auto* gb = parent_grad(self, 1)) {
      for (std::size_t i = 0; i < r; ++i) {
        const double* dyrow = dy.data() + i * c;
        for (std::size_t p = 0; p < k; ++p) {
          const double s = av[i * k + p];
          if (s == 0.0) continue;
          double* gbrow = gb->data() + p * c;
          for (std::size_t j = 0; j < c; ++j) gbrow[j] += s * dyrow[j];
        }
      }
    }
  });
}

Tensor transpose(const Tensor& a) {
  require_matrix(a, "transpose");
  const std::size_t r = a.rows();
  const std::size_t c = a.cols();
  const auto in = a.values();
  std::vector<double> out(r * c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = in[i * c + j];
  return make_op("transpose", {c, r}, std::move(out), {a}, [r, c](Node& self) {
    auto* g = parent_grad(self, 0);
    if (!g) return;
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) (*g)[i * c + j] += self.grad[j * r + i];
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  const auto x = a.values();
  const auto y = b.values();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + y[i];
  return make_op("add", a.shape(), std::move(out), {a, b}, [](Node& self) {
    for (std::size_t p = 0; p < 2; ++p) {
      if (auto* g = parent_grad(self, p))
        for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  const auto x = a.values();
  const auto y = b.values();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - y[i];
  return make_op("sub", a.shape(), std::move(out), {a, b}, [](Node& self) {
    if (auto* g = parent_grad(self, 0))
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
    if (auto* g = parent_grad(self, 1))
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] -= self.grad[i];
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  const auto x = a.values();
  const auto y = b.values();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * y[i];
  return make_op("mul", a.shape(), std::move(out), {a, b}, [](Node& self) {
    const auto& x = parent_value(self, 0);
    const auto& y = parent_value(self, 1);
    if (auto* g = parent_grad(self, 0))
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i] * y[i];
    if (auto* g = parent_grad(self, 1))
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i] * x[i];
  });
}

Tensor scale(const Tensor& a, double factor) {
  return unary(
      a, "scale", [factor](double x) { return x * factor; },
      [factor](double, double) { return factor; });
}

Tensor add_scalar(const Tensor& a, double offset) {
  return unary(
      a, "add_scalar", [offset](double x) { return x + offset; }, [](double, double) { return 1.0; });
}

Tensor add_bias(const Tensor& a, const Tensor& bias) {
  require_matrix(a, "add_bias");
  const std::size_t r = a.rows();
  const std::size_t c = a.cols();
  if (bias.numel() != c) {
    throw DimensionError("add_bias: bias " + to_string(bias.shape()) + " does not match columns of " +
                         to_string(a.shape()));
  }
  const auto x = a.values();
  const auto b = bias.values();
  std::vector<double> out(r * c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] = x[i * c + j] + b[j];
  return make_op("add_bias", {r, c}, std::move(out), {a, bias}, [r, c](Node& self) {
    if (auto* g = parent_grad(self, 0))
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
    if (auto* g = parent_grad(self, 1))
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) (*g)[j] += self.grad[i * c + j];
  });
}

Tensor relu(const Tensor& a) {
  return unary(
      a, "relu", [](double x) { return x <= 0.0 ? 0.0 : x; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor tanh(const Tensor& a) {
  return unary(
      a, "tanh", [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor& a) {
  return unary(
      a, "sigmoid",
      [](double x) {
        // Branches keep exp() from overflowing for large |x|.
        if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor softmax(const Tensor& x, std::size_t axis) {
  const AxisView v = axis_view(x.shape(), axis);
  const auto in = x.values();
  std::vector<double> out(in.size());
  for (std::size_t o = 0; o < v.outer; ++o) {
    for (std::size_t i = 0; i < v.inner; ++i) {
      const std::size_t base = o * v.length * v.inner + i;
      double peak = kNegInf;
      for (std::size_t t = 0; t < v.length; ++t) {
        const double x = in[base + t * v.inner];
        if (std::isnan(x) || x > peak) peak = x;
        if (std::isnan(peak)) break;
      }
      if (peak == kNegInf) {
        for (std::size_t t = 0; t < v.length; ++t)
          out[base + t * v.inner] = 1.0 / static_cast<double>(v.length);
        continue;
      }
      double total = 0.0;
      for (std::size_t t = 0; t < v.length; ++t) {
        const double e = std::exp(in[base + t * v.inner] - peak);
        out[base + t * v.inner] = e;
        total += e;
      }
      for (std::size_t t = 0; t < v.length; ++t) out[base + t * v.inner] /= total;
    }
  }
  return make_op("softmax", x.shape(), std::move(out), {x}, [v](Node& self) {
    auto* g = parent_grad(self, 0);
    if (!g) return;
    const auto& xin = parent_value(self, 0);
    const auto& y = *self.value;
    const auto& dy = self.grad;
    for (std::size_t o = 0; o < v.outer; ++o) {
      for (std::size_t i = 0; i < v.inner; ++i) {
        const std::size_t base = o * v.length * v.inner + i;
        bool all_masked = true;
        double dot = 0.0;
        for (std::size_t t = 0; t < v.length; ++t) {
          const std::size_t at = base + t * v.inner;
          if (xin[at] != kNegInf) all_masked = false;
          dot += dy[at] * y[at];
        }
        if (all_masked) continue;
        for (std::size_t t = 0; t < v.length; ++t) {
          const std::size_t at = base + t * v.inner;
          (*g)[at] += y[at] * (dy[at] - dot);
        }
      }
    }
  });
}

Tensor concat(std::span<const Tensor> parts, std::size_t axis) {
  if (parts.empty()) throw DimensionError("concat: no operands");
  const Shape& first = parts.front().shape();
  if (axis >= first.size()) {
    throw DimensionError("concat: axis " + std::to_string(axis) + " out of range for " + to_string(first));
  }
  Shape out_shape = first;
  out_shape[axis] = 0;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    bool compatible = s.size() == first.size();
    for (std::size_t d = 0; compatible && d < s.size(); ++d) {
      if (d != axis && s[d] != first[d]) compatible = false;
    }
    if (!compatible) {
      throw DimensionError("concat: " + to_string(first) + " and " + to_string(s) +
                           " differ off axis " + std::to_string(axis));
    }
    out_shape[axis] += s[axis];
  }
  const AxisView ov = axis_view(out_shape, axis);
  std::vector<std::size_t> blocks;  // per-part contiguous block size within one outer slice
  for (const auto& p : parts) blocks.push_back(p.shape()[axis] * ov.inner);
  const std::size_t out_block = ov.length * ov.inner;

  std::vector<double> out(ov.outer * out_block);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto in = parts[k].values();
    for (std::size_t o = 0; o < ov.outer; ++o)
      std::copy_n(in.begin() + o * blocks[k], blocks[k], out.begin() + o * out_block + offset);
    offset += blocks[k];
  }
  std::vector<Tensor> inputs(parts.begin(), parts.end());
  return make_op("concat", std::move(out_shape), std::move(out), std::move(inputs),
                 [blocks, out_block, outer = ov.outer](Node& self) {
                   std::size_t offset = 0;
                   for (std::size_t k = 0; k < blocks.size(); ++k) {
                     if (auto* g = parent_grad(self, k)) {
                       for (std::size_t o = 0; o < outer; ++o)
                         for (std::size_t i = 0; i < blocks[k]; ++i)
                           (*g)[o * blocks[k] + i] += self.grad[o * out_block + offset + i];
                     }
                     offset += blocks[k];
                   }
                 });
}

Tensor concat(std::initializer_list<Tensor> parts, std::size_t axis) {
  return concat(std::span<const Tensor>(parts.begin(), parts.size()), axis);
}

Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t end) {
  require_matrix(x, "slice_rows");
  if (begin >= end || end > x.rows()) {
    throw DimensionError("slice_rows: range [" + std::to_string(begin) + "," + std::to_string(end) +
                         ") invalid for " + to_string(x.shape()));
  }
  const std::size_t c = x.cols();
  const auto in = x.values();
  std::vector<double> out(in.begin() + begin * c, in.begin() + end * c);
  return make_op("slice_rows", {end - begin, c}, std::move(out), {x}, [begin, c](Node& self) {
    auto* g = parent_grad(self, 0);
    if (!g) return;
    for (std::size_t i = 0; i < self.grad.size(); ++i) (*g)[begin * c + i] += self.grad[i];
  });
}

Tensor tile_rows(const Tensor& row, std::size_t n) {
  require_matrix(row, "tile_rows");
  if (row.rows() != 1 || n == 0) {
    throw DimensionError("tile_rows: expected a 1 x c row and n > 0, got " + to_string(row.shape()));
  }
  const std::size_t c = row.cols();
  const auto in = row.values();
  std::vector<double> out(n * c);
  for (std::size_t i = 0; i < n; ++i) std::copy(in.begin(), in.end(), out.begin() + i * c);
  return make_op("tile_rows", {n, c}, std::move(out), {row}, [n, c](Node& self) {
    auto* g = parent_grad(self, 0);
    if (!g) return;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < c; ++j) (*g)[j] += self.grad[i * c + j];
  });
}

Tensor row_max(const Tensor& x) {
  require_matrix(x, "row_max");
  const std::size_t r = x.rows();
  const std::size_t c = x.cols();
  const auto in = x.values();
  std::vector<double> out(r);
  std::vector<std::size_t> argmax(r);
  for (std::size_t i = 0; i < r; ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < c; ++j)
      if (!std::isnan(in[i * c + best]) && !(in[i * c + j] <= in[i * c + best])) best = j;
    argmax[i] = best;
    out[i] = in[i * c + best];
  }
  return make_op("row_max", {r, 1}, std::move(out), {x}, [argmax, c](Node& self) {
    auto* g = parent_grad(self, 0);
    if (!g) return;
    const auto& y = *self.value;
    for (std::size_t i = 0; i < argmax.size(); ++i) {
      if (y[i] == kNegInf) continue;
      (*g)[i * c + argmax[i]] += self.grad[i];
    }
  });
}

Tensor sum(const Tensor& x) {
  double total = 0.0;
  for (double v : x.values()) total += v;
  return make_op("sum", {1}, {total}, {x}, [](Node& self) {
    auto* g = parent_grad(self, 0);
    if (!g) return;
    for (double& v : *g) v += self.grad[0];
  });
}

Tensor log_clamped(const Tensor& x, double floor) {
  return unary(
      x, "log", [floor](double v) { return std::log(std::max(v, floor)); },
      [floor](double v, double) { return v > floor ? 1.0 / v : 0.0; });
}

Tensor conv1d(const Tensor& x, const Tensor& kernels) {
  require_matrix(x, "conv1d");
  if (kernels.rank() != 3) {
    throw DimensionError("conv1d: kernels must be width x d_in x d_out, got " + to_string(kernels.shape()));
  }
  const std::size_t len = x.rows();
  const std::size_t d_in = x.cols();
  const std::size_t width = kernels.shape()[0];
  const std::size_t d_out = kernels.shape()[2];
  if (width % 2 == 0) throw ConfigError("conv1d: kernel width must be odd, got " + std::to_string(width));
  if (kernels.shape()[1] != d_in) {
    throw DimensionError("conv1d: input " + to_string(x.shape()) + " does not match kernels " +
                         to_string(kernels.shape()));
  }
  const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(width / 2);
  const auto xv = x.values();
  const auto kv = kernels.values();
  std::vector<double> out(len * d_out, 0.0);
  for (std::size_t t = 0; t < len; ++t) {
    double* orow = out.data() + t * d_out;
    for (std::size_t k = 0; k < width; ++k) {
      const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(t + k) - half;
      if (s < 0 || s >= static_cast<std::ptrdiff_t>(len)) continue;
      for (std::size_t i = 0; i < d_in; ++i) {
        const double v = xv[static_cast<std::size_t>(s) * d_in + i];
        if (v == 0.0) continue;
        const double* krow = kv.data() + (k * d_in + i) * d_out;
        for (std::size_t o = 0; o < d_out; ++o) orow[o] += v * krow[o];
      }
    }
  }
  return make_op("conv1d", {len, d_out}, std::move(out), {x, kernels},
                 [len, d_in, d_out, width, half](Node& self) {
                   const auto& xv = parent_value(self, 0);
                   const auto& kv = parent_value(self, 1);
                   auto* gx = parent_grad(self, 0);
                   auto* gk = parent_grad(self, 1);
                   for (std::size_t t = 0; t < len; ++t) {
                     const double* dy = self.grad.data() + t * d_out;
                     for (std::size_t k = 0; k < width; ++k) {
                       const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(t + k) - half;
                       if (s < 0 || s >= static_cast<std::ptrdiff_t>(len)) continue;
                       const std::size_t src = static_cast<std::size_t>(s);
                       for (std::size_t i = 0; i < d_in; ++i) {
                         const std::size_t kbase = (k * d_in + i) * d_out;
                         if (gx) {
                           double acc = 0.0;
                           for (std::size_t o = 0; o < d_out; ++o) acc += dy[o] * kv[kbase + o];
                           (*gx)[src * d_in + i] += acc;
                         }
                         if (gk) {
                           const double v = xv[src * d_in + i];
                           if (v == 0.0) continue;
                           for (std::size_t o = 0; o < d_out; ++o) (*gk)[kbase + o] += v * dy[o];
                         }
                       }
                     }
                   }
                 });
}

Tensor mask_rows(const Tensor& x, std::span<const double> mask) {
  require_matrix(x, "mask_rows");
  if (mask.size() != x.rows()) {
    throw DimensionError("mask_rows: " + std::to_string(mask.size()) + " mask entries for " +
                         to_string(x.shape()));
  }
  const std::size_t c = x.cols();
  std::vector<double> factors(x.numel());
  for (std::size_t i = 0; i < mask.size(); ++i)
    std::fill_n(factors.begin() + i * c, c, mask[i]);
  return mul_constant(x, factors);
}

Tensor masked_fill(const Tensor& x, std::span<const std::uint8_t> keep, double fill) {
  if (keep.size() != x.numel()) {
    throw DimensionError("masked_fill: " + std::to_string(keep.size()) + " flags for " + to_string(x.shape()));
  }
  const auto in = x.values();
  std::vector<double> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = keep[i] ? in[i] : fill;
  std::vector<std::uint8_t> flags(keep.begin(), keep.end());
  return make_op("masked_fill", x.shape(), std::move(out), {x}, [flags](Node& self) {
    auto* g = parent_grad(self, 0);
    if (!g) return;
    for (std::size_t i = 0; i < flags.size(); ++i)
      if (flags[i]) (*g)[i] += self.grad[i];
  });
}

Tensor mul_constant(const Tensor& x, std::span<const double> factors) {
  if (factors.size() != x.numel()) {
    throw DimensionError("mul_constant: " + std::to_string(factors.size()) + " factors for " +
                         to_string(x.shape()));
  }
  const auto in = x.values();
  std::vector<double> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] * factors[i];
  std::vector<double> f(factors.begin(), factors.end());
  return make_op("mul_constant", x.shape(), std::move(out), {x}, [f](Node& self) {
    auto* g = parent_grad(self, 0);
    if (!g) return;
    for (std::size_t i = 0; i < f.size(); ++i) (*g)[i] += self.grad[i] * f[i];
  });
}

Tensor dropout(const Tensor& x, double rate, Rng& rng) {
  if (rate <= 0.0) return x;
  if (rate >= 1.0) throw ConfigError("dropout rate must be in [0, 1), got " + std::to_string(rate));
  const double keep_scale = 1.0 / (1.0 - rate);
  std::vector<double> factors(x.numel());
  for (double& f : factors) f = rng.uniform() < rate ? 0.0 : keep_scale;
  return mul_constant(x, factors);
}

Tensor masked_mean_rows(const Tensor& x, std::span<const double> mask) {
  require_matrix(x, "masked_mean_rows");
  if (mask.size() != x.rows()) throw DimensionError("masked_mean_rows: mask length mismatch");
  double count = 0.0;
  for (double m : mask) count += m;
  if (count == 0.0) throw DataError("masked_mean_rows: every position is masked");
  std::vector<double> weights(mask.begin(), mask.end());
  for (double& w : weights) w /= count;
  const std::size_t r = weights.size();
  const Tensor w(Shape{1, r}, std::move(weights));
  return matmul(w, x);
}

Tensor masked_max_rows(const Tensor& x, std::span<const double> mask) {
  require_matrix(x, "masked_max_rows");
  if (mask.size() != x.rows()) throw DimensionError("masked_max_rows: mask length mismatch");
  const std::size_t r = x.rows();
  const std::size_t c = x.cols();
  std::vector<std::uint8_t> keep(r * c);
  for (std::size_t i = 0; i < r; ++i) std::fill_n(keep.begin() + i * c, c, mask[i] != 0.0);
  if (std::none_of(mask.begin(), mask.end(), [](double m) { return m != 0.0; })) {
    throw DataError("masked_max_rows: every position is masked");
  }
  return transpose(row_max(transpose(masked_fill(x, keep, kNegInf))));
}

Tensor elementwise(std::string_view name, std::span<const Tensor> operands, std::size_t axis) {
  auto arity = [&](std::size_t n) {
    if (operands.size() != n) {
      throw DimensionError(std::string(name) + " takes " + std::to_string(n) + " operand(s), got " +
                           std::to_string(operands.size()));
    }
  };
  if (name == "relu") return arity(1), relu(operands[0]);
  if (name == "tanh") return arity(1), tanh(operands[0]);
  if (name == "sigmoid") return arity(1), sigmoid(operands[0]);
  if (name == "add") return arity(2), add(operands[0], operands[1]);
  if (name == "sub") return arity(2), sub(operands[0], operands[1]);
  if (name == "mul") return arity(2), mul(operands[0], operands[1]);
  if (name == "concat") return concat(operands, axis);
  throw ConfigError("unknown elementwise op '" + std::string(name) + "'");
}

}  // namespace deim
