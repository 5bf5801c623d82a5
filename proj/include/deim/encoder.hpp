#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "deim/layers.hpp"
#include "deim/tensor.hpp"

namespace deim {

struct EncoderOptions {
  bool alignment = true;  // false: C' = C, Q' = Q
  bool fusion = true;     // false: [x; y] re-projected to d instead of the gate
};

/// Weights of the sentence encoder, shared by both sentences.
///
/// Projections are stored as right-multiplied matrices (rows are inputs), so
/// relu(C * align_a) is the row-major form of relu(W_c C^T)^T.
struct EncoderParams {
  Tensor input_proj;  // d_emb x d
  Tensor input_bias;  // d
  std::vector<Tensor> conv_kernels;  // each width x d x d
  std::vector<Tensor> conv_biases;   // each d
  Tensor attn_query;  // d x d
  Tensor attn_key;    // d x d
  Tensor attn_value;  // d x d
  Tensor align_a;     // d x d (alignment only)
  Tensor align_b;     // d x d (alignment only)
  Tensor fuse_candidate;  // 4d x d (fusion only)
  Tensor fuse_gate;       // 4d x d (fusion only)
  Tensor splice_proj;     // 2d x d (fusion disabled)

  static EncoderParams init(std::size_t embedding_dim, std::size_t hidden, std::size_t kernel_width,
                            std::size_t conv_layers, const EncoderOptions& options, Rng& rng);

  /// Defined tensors with stable names, in a fixed order.
  std::vector<NamedTensor> named() const;
};

/// Projection to d, then conv1d+relu sublayers and one single-head scaled
/// dot-product self-attention sublayer, each added back residually.
/// Masked rows are zero at every stage and never attended to.
Tensor encode_context(const Tensor& x, std::span<const std::uint8_t> mask, const EncoderParams& params,
                      const ForwardContext& ctx = {});

struct Alignment {
  Tensor scores;     // n x m, masked cells -inf
  Tensor weights_c;  // row softmax of scores (each row sums to 1 over unmasked columns)
  Tensor weights_q;  // column softmax of scores (each column sums to 1 over unmasked rows)
  Tensor c_aligned;  // n x d, weights_c * Q
  Tensor q_aligned;  // m x d, weights_q^T * C
};

/// Soft alignment: S = relu(C A) relu(Q B)^T; C' mixes rows of Q with the
/// row-normalized S, Q' mixes rows of C with the column-normalized S.
Alignment align(const Tensor& c, const Tensor& q, std::span<const std::uint8_t> mask_c,
                std::span<const std::uint8_t> mask_q, const EncoderParams& params);

struct Fusion {
  Tensor candidate;  // tanh(F W1)
  Tensor gate;       // sigmoid(F W2)
  Tensor output;     // gate * candidate + (1 - gate) * x
};

/// Gated fusion of x (pre-alignment) and y (aligned) using the heuristic
/// features F = [x; y; x*y; x-y].
Fusion fuse_parts(const Tensor& x, const Tensor& y, const EncoderParams& params);
Tensor fuse(const Tensor& x, const Tensor& y, const EncoderParams& params);

/// Fusion ablation: [x; y] projected back to width d.
Tensor splice_project(const Tensor& x, const Tensor& y, const EncoderParams& params);

struct EncodedPair {
  Tensor h;  // n x d
  Tensor p;  // m x d
  Tensor c;  // encoder outputs before alignment
  Tensor q;
  Alignment alignment;  // empty when alignment is disabled
};

EncodedPair encode_pair(const Tensor& x, const Tensor& y, std::span<const std::uint8_t> mask_a,
                        std::span<const std::uint8_t> mask_b, const EncoderParams& params,
                        const EncoderOptions& options, const ForwardContext& ctx = {});

}  // namespace deim
