#include "deim/trainer.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "deim/errors.hpp"
#include "parallel.hpp"

namespace deim {

namespace {

constexpr std::size_t kChunk = 4;  // pairs per gradient chunk; fixes the reduction order
constexpr const char* kStaticName = "embedding.static";

std::vector<std::size_t> iota_indices(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

void add_into(std::vector<double>& acc, std::span<const double> g) {
  for (std::size_t i = 0; i < g.size(); ++i) acc[i] += g[i];
}

void collect_static_rows(const Tensor& embedded, std::span<const TokenId> ids, std::span<const std::uint8_t> mask,
                         std::size_t d1, std::map<TokenId, std::vector<double>>& rows) {
  if (!embedded.has_grad()) return;
  const auto g = embedded.grad();
  const std::size_t width = embedded.cols();
  for (std::size_t t = 0; t < ids.size(); ++t) {
    if (!mask[t]) continue;
    auto& row = rows[ids[t]];
    if (row.empty()) row.assign(d1, 0.0);
    for (std::size_t j = 0; j < d1; ++j) row[j] += g[t * width + j];
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << text;
}

std::string fixed4(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << v;
  return s.str();
}

}  // namespace

std::vector<TokenizedPair> load_split(const std::string& path, const TrainConfig& config, const Vocab& vocab) {
  const Dataset data = read_dataset(path, config.task_id());
  return tokenize_dataset(data, vocab, config.effective_max_len()).pairs;
}

TrainData prepare_data(const TrainConfig& config) {
  if (config.train_path.empty()) throw ConfigError("no training file (set 'train')");
  const Task task = config.task_id();
  const Dataset train = read_dataset(config.train_path, task);
  TrainData out;
  out.vocab = config.vocab_path.empty() ? build_vocab(train) : Vocab::load(config.vocab_path);
  PairSet set = tokenize_dataset(train, out.vocab, config.effective_max_len());
  out.train = std::move(set.pairs);
  out.skipped_empty = set.skipped_empty;
  out.dropped_unlabeled = train.dropped_unlabeled;
  if (!config.dev_path.empty()) out.dev = load_split(config.dev_path, config, out.vocab);
  return out;
}

std::vector<NamedTensor> Model::trainable() const {
  std::vector<NamedTensor> out = params.named();
  if (!config.freeze_embeddings) out.emplace_back(kStaticName, table.static_vectors);
  return out;
}

std::shared_ptr<const ContextualProvider> make_contextual_provider(const TrainConfig& config) {
  const std::size_t d2 = config.effective_contextual_dim();
  if (d2 == 0) return nullptr;
  if (config.contextual_cache.empty()) return std::make_shared<StubContextualProvider>(d2, config.seed);
  auto cache = std::make_shared<ContextualCache>(ContextualCache::load(config.contextual_cache));
  if (cache->dim() != d2) {
    throw ConfigError("contextual cache width " + std::to_string(cache->dim()) + " does not match contextual_dim " +
                      std::to_string(d2));
  }
  return cache;
}

Model build_model(const TrainConfig& config, Vocab vocab, Rng& rng) {
  config.validate();
  Model m;
  m.config = config;
  m.vocab = std::move(vocab);
  m.model_config = config.model_config();
  m.table.static_vectors = config.glove_path.empty()
                               ? random_static_vectors(m.vocab, config.static_dim, rng)
                               : load_static_vectors(config.glove_path, m.vocab, config.static_dim, rng);
  m.table.contextual = make_contextual_provider(config);
  m.params = ModelParams::init(m.model_config, rng);
  return m;
}

Model model_from_checkpoint(const Checkpoint& ck) {
  ck.config.validate();
  Model m;
  m.config = ck.config;
  m.vocab = ck.vocab;
  m.model_config = ck.config.model_config();
  const TensorRecord& table = ck.tensor(kStaticName);
  if (table.shape != Shape{m.vocab.size(), ck.config.static_dim}) {
    throw DataError("checkpoint embedding table " + to_string(table.shape) + " does not match vocabulary of " +
                    std::to_string(m.vocab.size()) + " and static_dim " + std::to_string(ck.config.static_dim));
  }
  m.table.static_vectors = Tensor(table.shape, table.values, true);
  m.table.contextual = make_contextual_provider(ck.config);
  Rng unused(0);
  m.params = ModelParams::init(m.model_config, unused);
  for (auto& [name, t] : m.params.named()) {
    const TensorRecord& rec = ck.tensor(name);
    if (rec.shape != t.shape()) {
      throw DataError("checkpoint tensor '" + name + "' has shape " + to_string(rec.shape) + ", model expects " +
                      to_string(t.shape()));
    }
    std::copy(rec.values.begin(), rec.values.end(), t.mutable_values().begin());
  }
  return m;
}

std::string EvalReport::to_text() const {
  std::ostringstream s;
  s << "task=" << task << "\n";
  s << "fingerprint=" << fingerprint << "\n";
  s << "examples=" << examples << "\n";
  if (ranking) {
    s << "map=" << fixed4(map) << " mrr=" << fixed4(mrr) << "\n";
    s << "groups=" << groups_evaluated << "\n";
    s << "groups_without_answer=" << groups_without_answer << "\n";
    s << "no_answer_groups=" << (include_no_answer ? "included" : "excluded") << "\n";
  } else {
    s << "acc=" << fixed4(accuracy) << "\n";
  }
  return s.str();
}

EvalReport evaluate(const Model& model, const std::vector<TokenizedPair>& pairs, std::size_t threads) {
  const bool ranking = model.model_config.kind == TaskKind::Rank;
  EvalReport r;
  r.task = model.config.task;
  r.fingerprint = model.config.ablations.fingerprint();
  if (ranking) r.fingerprint += model.config.include_no_answer ? ";no_answer=included" : ";no_answer=excluded";
  r.ranking = ranking;
  r.examples = pairs.size();
  r.include_no_answer = model.config.include_no_answer;
  r.scores.assign(pairs.size(), 0.0);
  r.predictions.assign(pairs.size(), 0);
  detail::parallel_for(pairs.size(), threads, [&](std::size_t i) {
    NoGradGuard no_grad;
    const PairForward f = forward_pair(pairs[i], model.table, model.params, model.model_config);
    const auto out = f.output.values();
    if (ranking) {
      r.scores[i] = out[0];
    } else {
      const std::size_t k = argmax(out);
      r.predictions[i] = static_cast<int>(k);
      r.scores[i] = out[k];
    }
  });
  if (pairs.empty()) return r;
  if (ranking) {
    std::vector<std::vector<ScoredCandidate>> groups;
    for (const Group& g : group_pairs(pairs)) {
      auto& cands = groups.emplace_back();
      for (std::size_t i : g.members) cands.push_back({r.scores[i], pairs[i].label > 0});
    }
    const RankingMetrics m = map_mrr(groups, model.config.include_no_answer);
    r.map = m.map;
    r.mrr = m.mrr;
    r.groups_evaluated = m.groups_evaluated;
    r.groups_without_answer = m.groups_without_answer;
  } else {
    std::vector<int> labels;
    for (const auto& p : pairs) labels.push_back(p.label);
    r.accuracy = accuracy(r.predictions, labels);
  }
  return r;
}

BatchGradient batch_gradient(const Model& model, const std::vector<TokenizedPair>& pairs,
                             const std::vector<std::size_t>& indices, const std::vector<Triple>* triples,
                             bool training, std::uint64_t dropout_seed, std::size_t threads) {
  const bool tune = !model.config.freeze_embeddings;
  const std::size_t d1 = model.table.static_dim();
  const std::size_t items = indices.size();
  if (items == 0) throw DataError("empty batch");
  const double weight = model.config.reduction() == Reduction::Mean ? 1.0 / static_cast<double>(items) : 1.0;
  const auto param_shapes = model.params.named();

  struct ChunkResult {
    double loss = 0.0;
    std::vector<std::vector<double>> grads;
    std::map<TokenId, std::vector<double>> static_rows;
  };
  const std::size_t chunks = (items + kChunk - 1) / kChunk;
  std::vector<ChunkResult> results(chunks);

  detail::parallel_for(chunks, threads, [&](std::size_t c) {
    ChunkResult& out = results[c];
    for (const auto& [name, t] : param_shapes) out.grads.emplace_back(t.numel(), 0.0);
    const std::size_t end = std::min(items, (c + 1) * kChunk);
    for (std::size_t item = c * kChunk; item < end; ++item) {
      const ModelParams local = model.params.alias();
      Rng rng(Rng::derive(dropout_seed, item));
      const ForwardContext ctx{training, model.config.dropout, &rng};
      Tensor loss;
      std::vector<PairForward> forwards;
      std::vector<const TokenizedPair*> used;
      if (triples) {
        const Triple& tr = (*triples)[indices[item]];
        used = {&pairs[tr.positive], &pairs[tr.negative]};
        forwards.push_back(forward_pair(*used[0], model.table, local, model.model_config, ctx, tune));
        forwards.push_back(forward_pair(*used[1], model.table, local, model.model_config, ctx, tune));
        loss = hinge_loss(forwards[0].output, forwards[1].output);
      } else {
        used = {&pairs[indices[item]]};
        forwards.push_back(forward_pair(*used[0], model.table, local, model.model_config, ctx, tune));
        loss = cross_entropy(forwards[0].output, std::vector<int>{used[0]->label}, Reduction::Sum);
      }
      loss = scale(loss, weight);
      loss.backward();
      out.loss += loss.item();
      const auto named = local.named();
      for (std::size_t k = 0; k < named.size(); ++k)
        if (named[k].second.has_grad()) add_into(out.grads[k], named[k].second.grad());
      if (tune) {
        for (std::size_t f = 0; f < forwards.size(); ++f) {
          collect_static_rows(forwards[f].embedded.x, used[f]->ids_a, used[f]->mask_a, d1, out.static_rows);
          collect_static_rows(forwards[f].embedded.y, used[f]->ids_b, used[f]->mask_b, d1, out.static_rows);
        }
      }
    }
  });

  BatchGradient g;
  for (const auto& [name, t] : param_shapes) g.grads.emplace_back(t.numel(), 0.0);
  if (tune) g.grads.emplace_back(model.table.static_vectors.numel(), 0.0);
  for (const auto& r : results) {
    g.loss += r.loss;
    for (std::size_t k = 0; k < r.grads.size(); ++k) add_into(g.grads[k], r.grads[k]);
    if (tune) {
      auto& table = g.grads.back();
      for (const auto& [id, row] : r.static_rows)
        for (std::size_t j = 0; j < d1; ++j) table[static_cast<std::size_t>(id) * d1 + j] += row[j];
    }
  }
  return g;
}

Checkpoint make_checkpoint(const Model& model, const Adam* adam, std::size_t epoch, const std::string& rng_state) {
  Checkpoint c;
  c.config = model.config;
  c.vocab = model.vocab;
  c.epoch = epoch;
  c.step = adam ? adam->steps() : 0;
  c.rng_state = rng_state;
  c.fingerprint = model.config.ablations.fingerprint();
  auto record = [](const std::string& name, const Tensor& t) {
    return TensorRecord{name, t.shape(), std::vector<double>(t.values().begin(), t.values().end())};
  };
  for (const auto& [name, t] : model.params.named()) c.tensors.push_back(record(name, t));
  c.tensors.push_back(record(kStaticName, model.table.static_vectors));
  if (adam) {
    const auto trainable = model.trainable();
    for (std::size_t k = 0; k < trainable.size(); ++k) {
      const Shape& shape = trainable[k].second.shape();
      c.tensors.push_back({"adam.m/" + trainable[k].first, shape, adam->moments()[k].m});
      c.tensors.push_back({"adam.v/" + trainable[k].first, shape, adam->moments()[k].v});
    }
  }
  return c;
}

std::string history_to_tsv(const std::vector<EpochRecord>& history) {
  std::ostringstream s;
  s << std::setprecision(17);
  s << "epoch\ttrain_loss\ttrain_metric\tdev_metric\tgrad_norm\n";
  for (const auto& e : history)
    s << e.epoch << "\t" << e.train_loss << "\t" << e.train_metric << "\t" << e.dev_metric << "\t" << e.grad_norm
      << "\n";
  return s.str();
}

TrainResult train(const TrainConfig& config, const TrainData& data, const TrainHooks& hooks) {
  config.validate();
  if (data.train.empty()) throw DataError("training split is empty");
  Rng init_rng(config.seed);
  Model model = build_model(config, data.vocab, init_rng);
  const auto trainable = model.trainable();
  std::vector<std::size_t> sizes;
  for (const auto& [name, t] : trainable) sizes.push_back(t.numel());
  Adam adam(AdamOptions{config.lr, config.beta1, config.beta2, config.eps}, sizes);
  Rng order_rng(Rng::derive(config.seed, 0x5u));
  const bool ranking = model.model_config.kind == TaskKind::Rank;
  const std::vector<Group> groups = ranking ? group_pairs(data.train) : std::vector<Group>{};

  TrainResult result;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::vector<Triple> triples;
    std::size_t n = data.train.size();
    if (ranking) {
      triples = make_ranking_triples(data.train, groups, order_rng);
      n = triples.size();
      if (n == 0) throw DataError("no group has both a relevant and an irrelevant candidate");
    }
    EpochRecord rec;
    rec.epoch = epoch;
    double loss_total = 0.0;
    std::size_t batch_no = 0;
    for (const auto& idx : batch_indices(n, config.batch_size, &order_rng)) {
      ++batch_no;
      const std::uint64_t dropout_seed = Rng::derive(config.seed, adam.steps() + 1, 0xd);
      BatchGradient bg;
      if (ranking) {
        bg = batch_gradient(model, data.train, idx, &triples, true, dropout_seed, config.threads);
      } else {
        const Batch batch = make_batch(data.train, idx);
        bg = batch_gradient(model, batch.pairs, iota_indices(batch.size()), nullptr, true, dropout_seed,
                            config.threads);
      }
      std::vector<std::span<double>> grads;
      double max_abs = 0.0;
      for (auto& g : bg.grads) {
        grads.emplace_back(g);
        for (double x : g) max_abs = std::max(max_abs, std::abs(x));
      }
      if (!std::isfinite(bg.loss)) {
        throw NumericalError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                             std::to_string(batch_no) + " (max |grad| = " + std::to_string(max_abs) + ")");
      }
      rec.grad_norm = clip_global_norm(grads, config.clip_norm);
      std::vector<std::span<double>> values;
      std::vector<std::span<const double>> const_grads;
      for (std::size_t k = 0; k < trainable.size(); ++k) {
        Tensor t = trainable[k].second;
        values.push_back(t.mutable_values());
        const_grads.emplace_back(bg.grads[k]);
      }
      adam.step(values, const_grads);
      loss_total += config.loss_sum ? bg.loss : bg.loss * static_cast<double>(idx.size());
    }
    rec.train_loss = loss_total / static_cast<double>(n);
    if (hooks.eval_train || data.dev.empty()) rec.train_metric = evaluate(model, data.train, config.threads).primary();
    if (!data.dev.empty()) rec.dev_metric = evaluate(model, data.dev, config.threads).primary();
    const double selection = data.dev.empty() ? rec.train_metric : rec.dev_metric;
    result.history.push_back(rec);
    if (hooks.on_epoch) hooks.on_epoch(rec);
    if (hooks.log) {
      *hooks.log << "epoch=" << epoch << " loss=" << rec.train_loss;
      if (rec.train_metric >= 0) *hooks.log << " train_metric=" << fixed4(rec.train_metric);
      if (rec.dev_metric >= 0) *hooks.log << " dev_metric=" << fixed4(rec.dev_metric);
      *hooks.log << "\n";
    }
    if (selection > result.best_metric) {
      result.best_metric = selection;
      result.best_epoch = epoch;
      result.best = make_checkpoint(model, &adam, epoch, order_rng.state());
    } else if (config.patience > 0 && epoch - result.best_epoch >= config.patience) {
      break;
    }
    if (selection >= hooks.stop_at_metric) break;
  }
  result.model = model_from_checkpoint(result.best);
  if (!config.out_dir.empty()) {
    std::filesystem::create_directories(config.out_dir);
    result.best.save(config.out_dir + "/checkpoint");
    write_text_file(config.out_dir + "/history.tsv", history_to_tsv(result.history));
    write_text_file(config.out_dir + "/config.txt", config_to_text(config));
  }
  return result;
}

}  // namespace deim
