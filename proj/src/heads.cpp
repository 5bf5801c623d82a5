#include "deim/heads.hpp"

#include <string>

#include "deim/errors.hpp"

namespace deim {

HeadParams HeadParams::init(std::size_t pooled_width, TaskKind kind, std::size_t num_classes, Rng& rng) {
  const std::size_t out = kind == TaskKind::Rank ? 1 : num_classes;
  if (out == 0) throw ConfigError("classification head needs at least one class");
  HeadParams p;
  p.kind = kind;
  p.weight = glorot({pooled_width, out}, pooled_width, out, rng);
  p.bias = Tensor::zeros({out}, true);
  return p;
}

std::vector<NamedTensor> HeadParams::named() const { return {{"head.weight", weight}, {"head.bias", bias}}; }

Tensor pool_splice(const Tensor& z, std::span<const std::uint8_t> mask) {
  if (mask.size() != z.rows()) throw DimensionError("pool_splice: mask length does not match " + to_string(z.shape()));
  std::size_t first = mask.size();
  std::size_t last = 0;
  for (std::size_t t = 0; t < mask.size(); ++t) {
    if (!mask[t]) continue;
    if (first == mask.size()) first = t;
    last = t;
  }
  if (first == mask.size()) throw DataError("pool_splice: sequence has no unmasked positions");
  return concat({slice_rows(z, first, first + 1), slice_rows(z, last, last + 1)}, 1).set_label("pool");
}

Tensor pool_mean_max(const Tensor& z, std::span<const std::uint8_t> mask) {
  const auto weights = mask_weights(mask);
  return concat({masked_mean_rows(z, weights), masked_max_rows(z, weights)}, 1).set_label("pool");
}

Tensor pool(const Tensor& z, std::span<const std::uint8_t> mask, Pooling pooling) {
  return pooling == Pooling::Splice ? pool_splice(z, mask) : pool_mean_max(z, mask);
}

Tensor head_forward(const Tensor& pooled, const HeadParams& params) {
  if (pooled.rank() != 2 || pooled.cols() != params.weight.rows()) {
    throw DimensionError("head: pooled " + to_string(pooled.shape()) + " does not match weight " +
                         to_string(params.weight.shape()));
  }
  Tensor activated = tanh(add_bias(matmul(pooled, params.weight), params.bias)).set_label("head.logits");
  if (params.kind == TaskKind::Rank) return activated.set_label("head.output");
  return softmax(activated, 1).set_label("head.output");
}

Tensor cross_entropy(const Tensor& probs, std::span<const int> labels, Reduction reduction) {
  if (probs.rank() != 2 || probs.rows() != labels.size()) {
    throw DimensionError("cross_entropy: " + std::to_string(labels.size()) + " labels for probabilities " +
                         to_string(probs.shape()));
  }
  const std::size_t k = probs.cols();
  std::vector<double> one_hot(probs.numel(), 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= k) {
      throw DataError("cross_entropy: label " + std::to_string(labels[i]) + " outside [0, " + std::to_string(k) + ")");
    }
    one_hot[i * k + static_cast<std::size_t>(labels[i])] = 1.0;
  }
  const double factor = reduction == Reduction::Mean ? -1.0 / static_cast<double>(labels.size()) : -1.0;
  return scale(sum(mul_constant(log_clamped(probs, kLogFloor), one_hot)), factor).set_label("loss");
}

Tensor hinge_loss(const Tensor& pos, const Tensor& neg) {
  if (pos.shape() != neg.shape()) {
    throw DimensionError("hinge_loss: " + to_string(pos.shape()) + " vs " + to_string(neg.shape()));
  }
  const double n = static_cast<double>(pos.numel());
  return scale(sum(relu(sub(add_scalar(neg, 1.0), pos))), 1.0 / n).set_label("loss");
}

}  // namespace deim
