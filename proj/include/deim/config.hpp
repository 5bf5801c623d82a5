#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "deim/heads.hpp"
#include "deim/model.hpp"
#include "deim/pair.hpp"

namespace deim {

/// Every knob of a training or evaluation run. Defaults are the published
/// hyperparameters.
struct TrainConfig {
  std::string task = "snli";
  std::string train_path;
  std::string dev_path;
  std::string test_path;
  std::size_t max_len = 0;  // 0: the task's cap
  std::size_t batch_size = 128;
  std::uint64_t seed = 1;
  double lr = 0.0005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double dropout = 0.2;
  std::size_t epochs = 30;
  std::size_t hidden = 150;
  std::size_t kernel = 3;
  std::size_t conv_layers = 2;
  std::size_t static_dim = 300;
  std::size_t contextual_dim = 1024;
  std::string glove_path;
  std::string contextual_cache;
  std::string vocab_path;
  bool freeze_embeddings = false;
  bool loss_sum = false;
  std::string pooling = "splice";
  double clip_norm = 5.0;  // 0 disables clipping
  std::size_t patience = 0;  // 0: run every epoch
  bool include_no_answer = false;
  std::size_t threads = 1;
  std::string out_dir;
  AblationFlags ablations;

  /// Throws ConfigError on an out-of-range value or conflicting flags.
  void validate() const;

  Task task_id() const { return parse_task(task); }
  const TaskInfo& info() const { return task_info(task_id()); }
  std::size_t effective_max_len() const { return max_len ? max_len : info().max_len; }
  std::size_t effective_contextual_dim() const { return ablations.no_elmo ? 0 : contextual_dim; }
  Pooling pooling_mode() const;
  Reduction reduction() const { return loss_sum ? Reduction::Sum : Reduction::Mean; }
  ModelConfig model_config() const;
};

/// Names accepted by set_config_value, in file order.
const std::vector<std::string>& config_keys();

/// Assigns one key. Throws ConfigError listing the valid keys for an
/// unknown key, or naming the key for an unparsable value.
void set_config_value(TrainConfig& config, const std::string& key, const std::string& value);

std::string get_config_value(const TrainConfig& config, const std::string& key);

/// Applies `key = value` lines ('#' starts a comment) on top of `config`.
void apply_config_text(TrainConfig& config, const std::string& text, const std::string& source = "<config>");
TrainConfig load_config_file(const std::string& path, TrainConfig base = {});

/// Every key as `key=value`, one per line, in config_keys() order.
std::string config_to_text(const TrainConfig& config);

}  // namespace deim
