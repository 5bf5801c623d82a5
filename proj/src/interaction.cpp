#include "deim/interaction.hpp"

#include <limits>

#include "deim/errors.hpp"

namespace deim {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}  // namespace

InteractionParams InteractionParams::init(std::size_t hidden, Rng& rng) {
  InteractionParams p;
  p.sim_h = glorot({hidden, hidden}, hidden, hidden, rng);
  p.sim_p = glorot({hidden, hidden}, hidden, hidden, rng);
  return p;
}

std::vector<NamedTensor> InteractionParams::named() const {
  return {{"interaction.sim_h", sim_h}, {"interaction.sim_p", sim_p}};
}

Tensor similarity(const Tensor& h, const Tensor& p, std::span<const std::uint8_t> mask_h,
                  std::span<const std::uint8_t> mask_p, const InteractionParams& params) {
  if (h.cols() != p.cols()) {
    throw DimensionError("similarity: widths differ, " + to_string(h.shape()) + " vs " + to_string(p.shape()));
  }
  Tensor raw = matmul(relu(matmul(h, params.sim_h)), transpose(relu(matmul(p, params.sim_p))));
  return masked_fill(raw, cross_keep(mask_h, mask_p), kNegInf).set_label("bidaf.similarity");
}

Tensor h2p_attention(const Tensor& s, const Tensor& p) {
  if (s.cols() != p.rows()) {
    throw DimensionError("h2p_attention: " + to_string(s.shape()) + " does not match " + to_string(p.shape()));
  }
  return matmul(softmax(s, 1), p).set_label("bidaf.h2p");
}

P2HAttention p2h_attention(const Tensor& s, const Tensor& h) {
  if (s.rows() != h.rows()) {
    throw DimensionError("p2h_attention: " + to_string(s.shape()) + " does not match " + to_string(h.shape()));
  }
  P2HAttention out;
  out.weights = softmax(row_max(s), 0).set_label("bidaf.p2h_weights");
  out.summary = matmul(transpose(out.weights), h);
  out.tiled = tile_rows(out.summary, h.rows()).set_label("bidaf.p2h");
  return out;
}

Tensor merge(const Tensor& h, const Tensor& q_att, const Tensor& c_att) {
  if (h.shape() != q_att.shape() || h.shape() != c_att.shape()) {
    throw DimensionError("merge: shapes " + to_string(h.shape()) + ", " + to_string(q_att.shape()) + ", " +
                         to_string(c_att.shape()) + " must agree");
  }
  return concat({h, q_att, mul(h, q_att), mul(h, c_att)}, 1).set_label("merge");
}

Tensor self_attend(const Tensor& g, std::span<const std::uint8_t> mask) {
  Tensor energy = masked_fill(matmul(g, transpose(g)), cross_keep(mask, mask), kNegInf);
  return mask_rows(matmul(softmax(energy, 1), g), mask_weights(mask)).set_label("self_attend");
}

InteractionResult interact(const Tensor& h, const Tensor& p, std::span<const std::uint8_t> mask_h,
                           std::span<const std::uint8_t> mask_p, const InteractionParams& params,
                           const InteractionOptions& options) {
  if (!options.h2p && !options.p2h) throw ConfigError("interaction needs at least one attention direction");
  InteractionResult r;
  r.similarity = similarity(h, p, mask_h, mask_p, params);
  const Tensor zeros = Tensor::zeros(h.shape());
  r.h2p = options.h2p ? h2p_attention(r.similarity, p) : zeros;
  Tensor c_att = zeros;
  if (options.p2h) {
    r.p2h = p2h_attention(r.similarity, h);
    c_att = r.p2h.tiled;
  }
  r.merged = mask_rows(merge(h, r.h2p, c_att), mask_weights(mask_h));
  r.z = options.self_attention ? self_attend(r.merged, mask_h) : r.merged;
  return r;
}

}  // namespace deim
