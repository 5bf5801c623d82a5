#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "deim/adam.hpp"
#include "deim/checkpoint.hpp"
#include "deim/config.hpp"
#include "deim/data.hpp"
#include "deim/embedding.hpp"
#include "deim/metrics.hpp"
#include "deim/model.hpp"

namespace deim {

struct TrainData {
  Vocab vocab;
  std::vector<TokenizedPair> train;
  std::vector<TokenizedPair> dev;
  std::size_t skipped_empty = 0;
  std::size_t dropped_unlabeled = 0;
};

/// Reads config.train_path (and dev_path when set), building the
/// vocabulary from the training split unless config.vocab_path names one.
TrainData prepare_data(const TrainConfig& config);

/// Tokenizes one split against an existing vocabulary.
std::vector<TokenizedPair> load_split(const std::string& path, const TrainConfig& config, const Vocab& vocab);

/// A ready-to-run model: configuration, vocabulary, embeddings, weights.
struct Model {
  TrainConfig config;
  Vocab vocab;
  ModelConfig model_config;
  EmbeddingTable table;
  ModelParams params;

  /// Parameters updated by the optimizer, in a fixed order; includes
  /// "embedding.static" unless embeddings are frozen.
  std::vector<NamedTensor> trainable() const;
};

std::shared_ptr<const ContextualProvider> make_contextual_provider(const TrainConfig& config);

/// Fresh model: static vectors from config.glove_path (or random), then
/// weights, all drawn from `rng`.
Model build_model(const TrainConfig& config, Vocab vocab, Rng& rng);

/// Rebuilds a model from checkpoint tensors.
Model model_from_checkpoint(const Checkpoint& checkpoint);

struct EvalReport {
  std::string task;
  std::string fingerprint;
  bool ranking = false;
  std::size_t examples = 0;
  double accuracy = 0.0;
  double map = 0.0;
  double mrr = 0.0;
  std::size_t groups_evaluated = 0;
  std::size_t groups_without_answer = 0;
  bool include_no_answer = false;
  std::vector<int> predictions;  // class ids (classification)
  std::vector<double> scores;    // per-pair score: ranking output or top probability

  /// Model-selection metric: accuracy, or MAP for ranking.
  double primary() const { return ranking ? map : accuracy; }
  /// Machine-readable `key=value` lines.
  std::string to_text() const;
};

/// Inference-mode evaluation. Deterministic for any thread count.
EvalReport evaluate(const Model& model, const std::vector<TokenizedPair>& pairs, std::size_t threads = 1);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double train_metric = -1.0;  // -1 when not computed
  double dev_metric = -1.0;
  double grad_norm = 0.0;      // pre-clipping norm of the last batch
};

struct TrainHooks {
  /// Also evaluate the training split after every epoch.
  bool eval_train = false;
  /// Stop once the selection metric reaches this value (disabled when > 1).
  double stop_at_metric = 2.0;
  std::function<void(const EpochRecord&)> on_epoch;
  std::ostream* log = nullptr;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  Checkpoint best;
  std::size_t best_epoch = 0;
  double best_metric = -1.0;
  Model model;  // holds the best weights
};

/// Adam training with per-epoch evaluation. The selection metric is the dev
/// metric, or the training metric when there is no dev split; the best
/// epoch's full state is kept. Writes checkpoint/, history.tsv and
/// config.txt under config.out_dir when it is set. Throws NumericalError
/// on a non-finite loss.
TrainResult train(const TrainConfig& config, const TrainData& data, const TrainHooks& hooks = {});

/// Loss of one batch and its gradient, reduced over pairs in a fixed order.
struct BatchGradient {
  double loss = 0.0;
  std::vector<std::vector<double>> grads;  // aligned with Model::trainable()
};

/// Classification batch (pairs) or ranking batch (triples over `pairs`).
/// `dropout_seed` selects the per-pair dropout streams; training-mode
/// dropout is applied only when `training` is set.
BatchGradient batch_gradient(const Model& model, const std::vector<TokenizedPair>& pairs,
                             const std::vector<std::size_t>& indices, const std::vector<Triple>* triples,
                             bool training, std::uint64_t dropout_seed, std::size_t threads);

/// Checkpoint of the model plus optimizer state.
Checkpoint make_checkpoint(const Model& model, const Adam* adam, std::size_t epoch, const std::string& rng_state);

std::string history_to_tsv(const std::vector<EpochRecord>& history);

}  // namespace deim
