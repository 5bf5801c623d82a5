#pragma once

#include <cstdint>
#include <span>

#include "deim/layers.hpp"
#include "deim/tensor.hpp"

namespace deim {

struct InteractionOptions {
  bool h2p = true;             // false zeroes the H->P block (only P->H)
  bool p2h = true;             // false zeroes the P->H block (only H->P)
  bool self_attention = true;  // false: Z = G
};

/// Fresh similarity projections for the bidirectional layer (same
/// functional form as the alignment scores, applied to H and P).
struct InteractionParams {
  Tensor sim_h;  // d x d
  Tensor sim_p;  // d x d

  static InteractionParams init(std::size_t hidden, Rng& rng);
  std::vector<NamedTensor> named() const;
};

/// S = relu(H Wh) relu(P Wp)^T, with cells touching a masked position set
/// to -inf.
Tensor similarity(const Tensor& h, const Tensor& p, std::span<const std::uint8_t> mask_h,
                  std::span<const std::uint8_t> mask_p, const InteractionParams& params);

/// H->P: row t is sum_j softmax(S_t:)_j P_j.
Tensor h2p_attention(const Tensor& s, const Tensor& p);

struct P2HAttention {
  Tensor weights;  // n x 1, softmax over rows of the per-row max of S
  Tensor summary;  // 1 x d, weighted sum of H rows
  Tensor tiled;    // n x d, summary repeated for every position
};

/// P->H: b = softmax(max_j S_tj) over t, c = sum_t b_t H_t, tiled to n rows.
P2HAttention p2h_attention(const Tensor& s, const Tensor& h);

/// Per-position [h; q; h*q; h*c], width 4d.
Tensor merge(const Tensor& h, const Tensor& q_att, const Tensor& c_att);

/// Z_t = sum_u softmax(E_t:)_u G_u with E = G G^T over unmasked positions.
Tensor self_attend(const Tensor& g, std::span<const std::uint8_t> mask);

struct InteractionResult {
  Tensor similarity;
  Tensor h2p;
  P2HAttention p2h;
  Tensor merged;  // G, masked rows zero
  Tensor z;       // masked rows zero
};

InteractionResult interact(const Tensor& h, const Tensor& p, std::span<const std::uint8_t> mask_h,
                           std::span<const std::uint8_t> mask_p, const InteractionParams& params,
                           const InteractionOptions& options);

}  // namespace deim
