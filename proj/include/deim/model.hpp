#pragma once

#include <string>
#include <vector>

#include "deim/embedding.hpp"
#include "deim/encoder.hpp"
#include "deim/heads.hpp"
#include "deim/interaction.hpp"
#include "deim/layers.hpp"
#include "deim/pair.hpp"

namespace deim {

/// Component switches for the ablation matrix.
struct AblationFlags {
  bool no_elmo = false;
  bool no_alignment = false;
  bool no_fusion = false;
  bool no_self_attention = false;
  bool only_h2p = false;
  bool only_p2h = false;

  /// Throws ConfigError when only_h2p and only_p2h are both set.
  void validate() const;
  /// "full" or the '+'-joined names of the set flags.
  std::string fingerprint() const;
  bool operator==(const AblationFlags&) const = default;
};

struct ModelConfig {
  std::size_t embedding_dim = 0;  // d1 + d2 after ablations
  std::size_t hidden = 150;
  std::size_t kernel = 3;
  std::size_t conv_layers = 2;
  TaskKind kind = TaskKind::Classify;
  std::size_t num_classes = 3;
  AblationFlags ablations;
  Pooling pooling = Pooling::Splice;

  EncoderOptions encoder_options() const;
  InteractionOptions interaction_options() const;
  /// Width of Z rows (4 * hidden) and of the pooled vector (8 * hidden).
  std::size_t merged_width() const { return 4 * hidden; }
  std::size_t pooled_width() const { return 2 * merged_width(); }
};

/// Every trainable tensor except the static embedding table.
struct ModelParams {
  EncoderParams encoder;
  InteractionParams interaction;
  HeadParams head;

  static ModelParams init(const ModelConfig& config, Rng& rng);
  std::vector<NamedTensor> named() const;
  /// Leaves sharing these values but owning separate gradients.
  ModelParams alias() const;
};

struct PairForward {
  EmbeddedPair embedded;
  EncodedPair encoded;
  InteractionResult interaction;
  Tensor pooled;
  Tensor output;  // 1 x K probabilities, or 1 x 1 ranking score
};

/// Full forward pass for one (possibly padded) pair. `track_embedding_grad`
/// makes the embedded rows gradient leaves (for fine-tuning the table).
PairForward forward_pair(const TokenizedPair& pair, const EmbeddingTable& table, const ModelParams& params,
                         const ModelConfig& config, const ForwardContext& ctx = {},
                         bool track_embedding_grad = false);

/// Forward pass from already embedded sentences.
PairForward forward_embedded(EmbeddedPair embedded, std::span<const std::uint8_t> mask_a,
                             std::span<const std::uint8_t> mask_b, const ModelParams& params,
                             const ModelConfig& config, const ForwardContext& ctx = {});

/// Labels of the graph nodes every full-model forward pass must contain.
const std::vector<std::string>& required_graph_labels();

std::size_t parameter_count(const ModelParams& params);

/// Index of the largest probability (first on ties).
std::size_t argmax(std::span<const double> values);

}  // namespace deim
