#pragma once

#include <cstdint>
#include <span>

#include "deim/layers.hpp"
#include "deim/pair.hpp"
#include "deim/tensor.hpp"

namespace deim {

enum class Pooling {
  Splice,   // [Z_first; Z_last] over unmasked positions
  MeanMax,  // [mean; max] over unmasked positions, for comparison runs
};

struct HeadParams {
  Tensor weight;  // pooled_width x out_dim
  Tensor bias;    // out_dim
  TaskKind kind = TaskKind::Classify;

  /// out_dim is num_classes for classification and 1 for ranking.
  static HeadParams init(std::size_t pooled_width, TaskKind kind, std::size_t num_classes, Rng& rng);
  std::vector<NamedTensor> named() const;
};

/// 1 x 2w splice of the first and last unmasked rows of Z (n x w).
/// Throws DataError when every position is masked.
Tensor pool_splice(const Tensor& z, std::span<const std::uint8_t> mask);
Tensor pool_mean_max(const Tensor& z, std::span<const std::uint8_t> mask);
Tensor pool(const Tensor& z, std::span<const std::uint8_t> mask, Pooling pooling);

/// Classification: softmax(tanh(pooled W + b)), 1 x K.
/// Ranking: tanh(pooled W + b), 1 x 1 in (-1, 1).
Tensor head_forward(const Tensor& pooled, const HeadParams& params);

enum class Reduction { Mean, Sum };

inline constexpr double kLogFloor = 1e-12;

/// -sum_i log p_i[label_i] over an N x K probability batch, with the log
/// clamped at 1e-12. Mean divides by N. Throws DataError on a label
/// outside [0, K).
Tensor cross_entropy(const Tensor& probs, std::span<const int> labels, Reduction reduction = Reduction::Mean);

/// mean_i max(0, 1 - pos_i + neg_i) over N x 1 score columns.
Tensor hinge_loss(const Tensor& pos, const Tensor& neg);

}  // namespace deim
