#include "deim/encoder.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "deim/errors.hpp"

namespace deim {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}  // namespace

EncoderParams EncoderParams::init(std::size_t embedding_dim, std::size_t hidden, std::size_t kernel_width,
                                  std::size_t conv_layers, const EncoderOptions& options, Rng& rng) {
  if (kernel_width % 2 == 0) {
    throw ConfigError("convolution kernel width must be odd, got " + std::to_string(kernel_width));
  }
  if (hidden == 0 || embedding_dim == 0) throw ConfigError("encoder dimensions must be positive");
  const std::size_t d = hidden;
  EncoderParams p;
  p.input_proj = glorot({embedding_dim, d}, embedding_dim, d, rng);
  p.input_bias = Tensor::zeros({d}, true);
  for (std::size_t l = 0; l < conv_layers; ++l) {
    p.conv_kernels.push_back(glorot({kernel_width, d, d}, kernel_width * d, d, rng));
    p.conv_biases.push_back(Tensor::zeros({d}, true));
  }
  p.attn_query = glorot({d, d}, d, d, rng);
  p.attn_key = glorot({d, d}, d, d, rng);
  p.attn_value = glorot({d, d}, d, d, rng);
  if (options.alignment) {
    p.align_a = glorot({d, d}, d, d, rng);
    p.align_b = glorot({d, d}, d, d, rng);
  }
  if (options.fusion) {
    p.fuse_candidate = glorot({4 * d, d}, 4 * d, d, rng);
    p.fuse_gate = glorot({4 * d, d}, 4 * d, d, rng);
  } else {
    p.splice_proj = glorot({2 * d, d}, 2 * d, d, rng);
  }
  return p;
}

std::vector<NamedTensor> EncoderParams::named() const {
  std::vector<NamedTensor> out;
  auto put = [&](const std::string& name, const Tensor& t) {
    if (t.defined()) out.emplace_back(name, t);
  };
  put("encoder.input_proj", input_proj);
  put("encoder.input_bias", input_bias);
  for (std::size_t l = 0; l < conv_kernels.size(); ++l) {
    put("encoder.conv" + std::to_string(l) + ".kernel", conv_kernels[l]);
    put("encoder.conv" + std::to_string(l) + ".bias", conv_biases[l]);
  }
  put("encoder.attn_query", attn_query);
  put("encoder.attn_key", attn_key);
  put("encoder.attn_value", attn_value);
  put("encoder.align_a", align_a);
  put("encoder.align_b", align_b);
  put("encoder.fuse_candidate", fuse_candidate);
  put("encoder.fuse_gate", fuse_gate);
  put("encoder.splice_proj", splice_proj);
  return out;
}

Tensor encode_context(const Tensor& x, std::span<const std::uint8_t> mask, const EncoderParams& params,
                      const ForwardContext& ctx) {
  const auto rows = mask_weights(mask);
  Tensor h = mask_rows(add_bias(matmul(mask_rows(x, rows), params.input_proj), params.input_bias), rows);
  for (std::size_t l = 0; l < params.conv_kernels.size(); ++l) {
    Tensor local = relu(add_bias(conv1d(h, params.conv_kernels[l]), params.conv_biases[l]));
    h = add(h, mask_rows(ctx.drop(local), rows));
  }
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(h.cols()));
  Tensor queries = matmul(h, params.attn_query);
  Tensor keys = matmul(h, params.attn_key);
  Tensor scores = masked_fill(scale(matmul(queries, transpose(keys)), inv_sqrt_d), cross_keep(mask, mask), kNegInf);
  Tensor attended = matmul(softmax(scores, 1), matmul(h, params.attn_value));
  return add(h, mask_rows(ctx.drop(attended), rows));
}

Alignment align(const Tensor& c, const Tensor& q, std::span<const std::uint8_t> mask_c,
                std::span<const std::uint8_t> mask_q, const EncoderParams& params) {
  if (c.cols() != q.cols()) {
    throw DimensionError("align: widths differ, " + to_string(c.shape()) + " vs " + to_string(q.shape()));
  }
  Alignment a;
  Tensor raw = matmul(relu(matmul(c, params.align_a)), transpose(relu(matmul(q, params.align_b))));
  a.scores = masked_fill(raw, cross_keep(mask_c, mask_q), kNegInf).set_label("align.scores");
  a.weights_c = softmax(a.scores, 1).set_label("align.weights");
  a.weights_q = softmax(a.scores, 0).set_label("align.weights_transposed");
  a.c_aligned = mask_rows(matmul(a.weights_c, q), mask_weights(mask_c)).set_label("align.c_prime");
  a.q_aligned = mask_rows(matmul(transpose(a.weights_q), c), mask_weights(mask_q)).set_label("align.q_prime");
  return a;
}

Fusion fuse_parts(const Tensor& x, const Tensor& y, const EncoderParams& params) {
  if (x.shape() != y.shape()) {
    throw DimensionError("fuse: shape mismatch " + to_string(x.shape()) + " vs " + to_string(y.shape()));
  }
  const Tensor features = concat({x, y, mul(x, y), sub(x, y)}, 1);
  Fusion f;
  f.candidate = tanh(matmul(features, params.fuse_candidate)).set_label("fuse.candidate");
  f.gate = sigmoid(matmul(features, params.fuse_gate)).set_label("fuse.gate");
  const Tensor keep = add_scalar(scale(f.gate, -1.0), 1.0);
  f.output = add(mul(f.gate, f.candidate), mul(keep, x)).set_label("fuse.output");
  return f;
}

Tensor fuse(const Tensor& x, const Tensor& y, const EncoderParams& params) { return fuse_parts(x, y, params).output; }

Tensor splice_project(const Tensor& x, const Tensor& y, const EncoderParams& params) {
  if (x.shape() != y.shape()) {
    throw DimensionError("splice: shape mismatch " + to_string(x.shape()) + " vs " + to_string(y.shape()));
  }
  return matmul(concat({x, y}, 1), params.splice_proj).set_label("fuse.splice");
}

EncodedPair encode_pair(const Tensor& x, const Tensor& y, std::span<const std::uint8_t> mask_a,
                        std::span<const std::uint8_t> mask_b, const EncoderParams& params,
                        const EncoderOptions& options, const ForwardContext& ctx) {
  EncodedPair out;
  out.c = encode_context(x, mask_a, params, ctx);
  out.q = encode_context(y, mask_b, params, ctx);
  Tensor c_aligned = out.c;
  Tensor q_aligned = out.q;
  if (options.alignment) {
    out.alignment = align(out.c, out.q, mask_a, mask_b, params);
    c_aligned = out.alignment.c_aligned;
    q_aligned = out.alignment.q_aligned;
  }
  if (options.fusion) {
    out.h = fuse(out.c, c_aligned, params);
    out.p = fuse(out.q, q_aligned, params);
  } else {
    out.h = splice_project(out.c, c_aligned, params);
    out.p = splice_project(out.q, q_aligned, params);
  }
  return out;
}

}  // namespace deim
