#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "deim/config.hpp"
#include "deim/errors.hpp"
#include "deim/trainer.hpp"

namespace deim::cli {
namespace {

namespace fs = std::filesystem;

std::string fixed4(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << v;
  return s.str();
}

std::string signed4(double v) {
  std::ostringstream s;
  s << std::showpos << std::fixed << std::setprecision(4) << v;
  return s.str();
}

bool is_bool_key(const std::string& key) {
  const std::string v = get_config_value(TrainConfig{}, key);
  return v == "true" || v == "false";
}

// `--config FILE` plus one `--key value` option per config key. Values are
// kept as text and applied after the file, in command-line order.
struct ConfigOptions {
  std::string config_path;
  std::map<std::string, std::string> values;

  void attach(CLI::App& cmd) {
    cmd.add_option("--config", config_path, "key=value config file")->check(CLI::ExistingFile);
    for (const std::string& key : config_keys()) {
      std::string names = "--" + key;
      std::string dashed = key;
      std::replace(dashed.begin(), dashed.end(), '_', '-');
      if (dashed != key) names += ",--" + dashed;
      if (is_bool_key(key)) {
        cmd.add_option(names, values[key], "config key " + key)->expected(0, 1)->default_str("true");
      } else {
        cmd.add_option(names, values[key], "config key " + key);
      }
    }
  }

  TrainConfig resolve(const CLI::App& cmd) const {
    TrainConfig config = config_path.empty() ? TrainConfig{} : load_config_file(config_path);
    for (const auto& [key, value] : values) {
      if (cmd.count("--" + key) == 0) continue;
      set_config_value(config, key, value.empty() ? "true" : value);
    }
    config.validate();
    return config;
  }
};

std::string default_out_dir(const std::string& command, const TrainConfig& c) {
  return (fs::path(output_root()) /
          (command + "-" + c.task + "-" + c.ablations.fingerprint() + "-seed" + std::to_string(c.seed)))
      .string();
}

void print_config(std::ostream& out, const TrainConfig& c) {
  std::istringstream lines(config_to_text(c));
  for (std::string line; std::getline(lines, line);) out << "config." << line << "\n";
}

int cmd_prep_vocab(const TrainConfig& config, const std::string& out_path, std::size_t min_count, std::ostream& out) {
  if (config.train_path.empty()) throw ConfigError("prep-vocab: --train is required");
  const Dataset train = read_dataset(config.train_path, config.task_id());
  const Vocab vocab = build_vocab(train, min_count);
  const std::string path = out_path.empty() ? (fs::path(output_root()) / "vocab.txt").string() : out_path;
  if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
  vocab.save(path);
  out << "vocab=" << path << "\n";
  out << "vocab_size=" << vocab.size() << "\n";
  out << "records=" << train.records.size() << "\n";
  out << "dropped_unlabeled=" << train.dropped_unlabeled << "\n";
  return kOk;
}

int cmd_train(TrainConfig config, std::ostream& out, std::ostream& err) {
  if (config.train_path.empty()) throw ConfigError("train: --train is required");
  if (config.out_dir.empty()) config.out_dir = default_out_dir("train", config);
  print_config(out, config);
  const TrainData data = prepare_data(config);
  TrainHooks hooks;
  hooks.log = &err;
  const TrainResult result = train(config, data, hooks);
  const EpochRecord& last = result.history.back();
  out << "out_dir=" << config.out_dir << "\n";
  out << "checkpoint=" << (fs::path(config.out_dir) / "checkpoint").string() << "\n";
  out << "epochs_run=" << result.history.size() << "\n";
  out << "best_epoch=" << result.best_epoch << "\n";
  out << "best_metric=" << fixed4(result.best_metric) << "\n";
  out << "final_train_loss=" << last.train_loss << "\n";
  out << "final_dev_metric=" << (last.dev_metric < 0 ? std::string("none") : fixed4(last.dev_metric)) << "\n";
  return kOk;
}

Model load_model(const std::string& checkpoint_dir) {
  if (!fs::exists(fs::path(checkpoint_dir) / "manifest.txt")) {
    throw DataError("no checkpoint at '" + checkpoint_dir + "' (manifest.txt missing)");
  }
  return model_from_checkpoint(Checkpoint::load(checkpoint_dir));
}

void check_task(const Model& model, const std::string& task) {
  if (!task.empty() && task != model.config.task) {
    throw ConfigError("checkpoint was trained for task '" + model.config.task + "', not '" + task + "'");
  }
}

int cmd_eval(const std::string& checkpoint_dir, const std::string& data_path, const std::string& task,
             std::size_t threads, std::ostream& out) {
  const Model model = load_model(checkpoint_dir);
  check_task(model, task);
  const auto pairs = load_split(data_path, model.config, model.vocab);
  const EvalReport report = evaluate(model, pairs, threads);
  out << report.to_text();
  return kOk;
}

// Lines: "a<TAB>b", "label<TAB>a<TAB>b" or "label<TAB>a<TAB>b<TAB>group".
std::vector<TokenizedPair> read_predict_input(const std::string& path, const Model& model) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::vector<TokenizedPair> pairs;
  const std::size_t cap = model.config.effective_max_len();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream s(line);
    for (std::string f; std::getline(s, f, '\t');) fields.push_back(f);
    if (fields.size() < 2 || fields.size() > 4) {
      throw DataError(path + ":" + std::to_string(line_no) + ": expected 2 to 4 tab-separated fields, found " +
                      std::to_string(fields.size()));
    }
    const std::size_t first = fields.size() == 2 ? 0 : 1;
    auto a = tokenize(fields[first]);
    auto b = tokenize(fields[first + 1]);
    if (a.size() > cap) a.resize(cap);
    if (b.size() > cap) b.resize(cap);
    if (a.empty() || b.empty()) {
      throw DataError(path + ":" + std::to_string(line_no) + ": empty sentence");
    }
    pairs.push_back(make_pair(model.vocab, a, b, 0, std::to_string(line_no)));
  }
  return pairs;
}

int cmd_predict(const std::string& checkpoint_dir, const std::string& data_path, std::size_t threads,
                std::ostream& out) {
  const Model model = load_model(checkpoint_dir);
  const auto pairs = read_predict_input(data_path, model);
  const EvalReport report = evaluate(model, pairs, threads);
  const TaskInfo& info = model.config.info();
  out << "line\tprediction\tscore\n";
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    out << pairs[i].pair_id << "\t";
    if (report.ranking) {
      out << "-";
    } else {
      out << info.labels.at(static_cast<std::size_t>(report.predictions[i]));
    }
    out << "\t" << std::setprecision(17) << report.scores[i] << "\n";
  }
  return kOk;
}

struct AblationRow {
  std::string name;
  AblationFlags flags;
};

std::vector<AblationRow> ablation_rows() {
  std::vector<AblationRow> rows(7);
  rows[0].name = "full";
  rows[1].name = "w/o elmo";
  rows[1].flags.no_elmo = true;
  rows[2].name = "w/o alignment";
  rows[2].flags.no_alignment = true;
  rows[3].name = "w/o fusion";
  rows[3].flags.no_fusion = true;
  rows[4].name = "w/o self-attention";
  rows[4].flags.no_self_attention = true;
  rows[5].name = "only h2p";
  rows[5].flags.only_h2p = true;
  rows[6].name = "only p2h";
  rows[6].flags.only_p2h = true;
  return rows;
}

int cmd_ablate(TrainConfig base, std::size_t seeds, std::ostream& out, std::ostream& err) {
  if (base.train_path.empty()) throw ConfigError("ablate: --train is required");
  if (seeds == 0) throw ConfigError("ablate: --seeds must be at least 1");
  if (base.ablations != AblationFlags{}) {
    throw ConfigError("ablate: the base config must have every ablation flag off");
  }
  const std::string root =
      base.out_dir.empty() ? default_out_dir("ablate", base) : base.out_dir;
  print_config(out, base);
  const TrainData data = prepare_data(base);
  const char* metric_name = base.info().kind == TaskKind::Rank ? "map" : "acc";
  std::vector<double> full_metrics;
  double full_mean = 0.0;
  std::size_t index = 0;
  for (const AblationRow& row : ablation_rows()) {
    ++index;
    std::vector<double> metrics;
    std::size_t params = 0;
    for (std::size_t s = 0; s < seeds; ++s) {
      TrainConfig c = base;
      c.ablations = row.flags;
      c.seed = base.seed + s;
      c.out_dir = (fs::path(root) / row.flags.fingerprint() / ("seed" + std::to_string(c.seed))).string();
      err << "ablate: " << row.name << " seed " << c.seed << "\n";
      const TrainResult r = train(c, data);
      metrics.push_back(r.best_metric);
      params = parameter_count(r.model.params);
    }
    const double mean = std::accumulate(metrics.begin(), metrics.end(), 0.0) / static_cast<double>(metrics.size());
    if (index == 1) {
      full_mean = mean;
      full_metrics = metrics;
    }
    out << "row=" << index << " variant=" << std::quoted(row.name) << " fingerprint=" << row.flags.fingerprint()
        << " params=" << params << " " << metric_name << "=" << fixed4(mean) << " delta=" << signed4(mean - full_mean)
        << " seeds=";
    for (std::size_t s = 0; s < metrics.size(); ++s) out << (s ? "," : "") << fixed4(metrics[s]);
    out << " per_seed_delta=";
    for (std::size_t s = 0; s < metrics.size(); ++s) out << (s ? "," : "") << signed4(metrics[s] - full_metrics[s]);
    out << "\n";
  }
  out << "out_dir=" << root << "\n";
  return kOk;
}

}  // namespace

std::string output_root() {
  const char* env = std::getenv("DEIM_OUTPUT_ROOT");
  return env && *env ? std::string(env) : std::string("runs");
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sentence-pair matching: train, evaluate and ablate", "deim"};
  app.require_subcommand(1);

  ConfigOptions prep_opts, train_opts, ablate_opts;
  std::string vocab_out;
  std::size_t min_count = 1;
  auto* prep = app.add_subcommand("prep-vocab", "build a vocabulary from the training split");
  prep_opts.attach(*prep);
  prep->add_option("--out", vocab_out, "vocabulary file to write");
  prep->add_option("--min-count", min_count, "drop tokens seen fewer times");

  auto* train_cmd = app.add_subcommand("train", "train a model and write a checkpoint");
  train_opts.attach(*train_cmd);

  std::string checkpoint, data_path, task;
  std::size_t threads = 1;
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a labeled split");
  eval->add_option("--checkpoint", checkpoint, "checkpoint directory")->required();
  eval->add_option("--data", data_path, "labeled TSV split")->required();
  eval->add_option("--task", task, "expected task of the checkpoint");
  eval->add_option("--threads", threads, "worker threads");

  auto* predict = app.add_subcommand("predict", "score sentence pairs with a checkpoint");
  predict->add_option("--checkpoint", checkpoint, "checkpoint directory")->required();
  predict->add_option("--data", data_path, "TSV of sentence pairs")->required();
  predict->add_option("--threads", threads, "worker threads");

  std::size_t seeds = 1;
  auto* ablate = app.add_subcommand("ablate", "train and evaluate the seven ablation configurations");
  ablate_opts.attach(*ablate);
  ablate->add_option("--seeds", seeds, "seeds per configuration, starting at --seed");

  std::vector<std::string> argv_rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(argv_rev);
  } catch (const CLI::ExtrasError& e) {
    err << "usage error: " << e.what() << "\nvalid config keys:";
    for (const auto& key : config_keys()) err << " " << key;
    err << "\n";
    return kUsage;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*prep) return cmd_prep_vocab(prep_opts.resolve(*prep), vocab_out, min_count, out);
    if (*train_cmd) return cmd_train(train_opts.resolve(*train_cmd), out, err);
    if (*eval) return cmd_eval(checkpoint, data_path, task, threads, out);
    if (*predict) return cmd_predict(checkpoint, data_path, threads, out);
    if (*ablate) return cmd_ablate(ablate_opts.resolve(*ablate), seeds, out, err);
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    err << "data error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}

}  // namespace deim::cli
