#include "deim/model.hpp"

#include "deim/errors.hpp"

namespace deim {

void AblationFlags::validate() const {
  if (only_h2p && only_p2h) throw ConfigError("only_h2p and only_p2h are mutually exclusive");
}

std::string AblationFlags::fingerprint() const {
  std::string out;
  auto put = [&](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += '+';
    out += name;
  };
  put(no_elmo, "no_elmo");
  put(no_alignment, "no_alignment");
  put(no_fusion, "no_fusion");
  put(no_self_attention, "no_self_attention");
  put(only_h2p, "only_h2p");
  put(only_p2h, "only_p2h");
  return out.empty() ? "full" : out;
}

EncoderOptions ModelConfig::encoder_options() const {
  return {.alignment = !ablations.no_alignment, .fusion = !ablations.no_fusion};
}

InteractionOptions ModelConfig::interaction_options() const {
  return {.h2p = !ablations.only_p2h, .p2h = !ablations.only_h2p, .self_attention = !ablations.no_self_attention};
}

ModelParams ModelParams::init(const ModelConfig& config, Rng& rng) {
  config.ablations.validate();
  ModelParams p;
  p.encoder = EncoderParams::init(config.embedding_dim, config.hidden, config.kernel, config.conv_layers,
                                  config.encoder_options(), rng);
  p.interaction = InteractionParams::init(config.hidden, rng);
  p.head = HeadParams::init(config.pooled_width(), config.kind, config.num_classes, rng);
  return p;
}

std::vector<NamedTensor> ModelParams::named() const {
  std::vector<NamedTensor> out = encoder.named();
  for (auto& t : interaction.named()) out.push_back(std::move(t));
  for (auto& t : head.named()) out.push_back(std::move(t));
  return out;
}

ModelParams ModelParams::alias() const {
  auto al = [](const Tensor& t) { return t.defined() ? t.alias() : Tensor(); };
  ModelParams p;
  p.encoder.input_proj = al(encoder.input_proj);
  p.encoder.input_bias = al(encoder.input_bias);
  for (const auto& k : encoder.conv_kernels) p.encoder.conv_kernels.push_back(al(k));
  for (const auto& b : encoder.conv_biases) p.encoder.conv_biases.push_back(al(b));
  p.encoder.attn_query = al(encoder.attn_query);
  p.encoder.attn_key = al(encoder.attn_key);
  p.encoder.attn_value = al(encoder.attn_value);
  p.encoder.align_a = al(encoder.align_a);
  p.encoder.align_b = al(encoder.align_b);
  p.encoder.fuse_candidate = al(encoder.fuse_candidate);
  p.encoder.fuse_gate = al(encoder.fuse_gate);
  p.encoder.splice_proj = al(encoder.splice_proj);
  p.interaction.sim_h = al(interaction.sim_h);
  p.interaction.sim_p = al(interaction.sim_p);
  p.head.weight = al(head.weight);
  p.head.bias = al(head.bias);
  p.head.kind = head.kind;
  return p;
}

PairForward forward_pair(const TokenizedPair& pair, const EmbeddingTable& table, const ModelParams& params,
                         const ModelConfig& config, const ForwardContext& ctx, bool track_embedding_grad) {
  if (table.dim() != config.embedding_dim) {
    throw DimensionError("embedding table width " + std::to_string(table.dim()) + " does not match model input " +
                         std::to_string(config.embedding_dim));
  }
  return forward_embedded(embed_pair(pair, table, track_embedding_grad), pair.mask_a, pair.mask_b, params, config,
                          ctx);
}

PairForward forward_embedded(EmbeddedPair embedded, std::span<const std::uint8_t> mask_a,
                             std::span<const std::uint8_t> mask_b, const ModelParams& params,
                             const ModelConfig& config, const ForwardContext& ctx) {
  PairForward f;
  f.embedded = std::move(embedded);
  const Tensor x = ctx.drop(f.embedded.x);
  const Tensor y = ctx.drop(f.embedded.y);
  f.encoded = encode_pair(x, y, mask_a, mask_b, params.encoder, config.encoder_options(), ctx);
  f.interaction = interact(f.encoded.h, f.encoded.p, mask_a, mask_b, params.interaction,
                           config.interaction_options());
  f.pooled = pool(f.interaction.z, mask_a, config.pooling);
  f.output = head_forward(f.pooled, params.head);
  return f;
}

const std::vector<std::string>& required_graph_labels() {
  static const std::vector<std::string> labels = {
      "align.scores", "align.weights", "align.weights_transposed", "align.c_prime", "align.q_prime",
      "fuse.candidate", "fuse.gate", "fuse.output", "bidaf.similarity", "bidaf.h2p", "bidaf.p2h_weights",
      "bidaf.p2h", "merge", "self_attend", "pool", "head.logits", "head.output",
  };
  return labels;
}

std::size_t parameter_count(const ModelParams& params) {
  std::size_t n = 0;
  for (const auto& [name, t] : params.named()) n += t.numel();
  return n;
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

}  // namespace deim
