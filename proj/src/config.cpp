#include "deim/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "deim/errors.hpp"

namespace deim {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || end != value.data() + value.size()) {
    throw ConfigError("invalid value '" + value + "' for key '" + key + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  throw ConfigError("invalid boolean '" + value + "' for key '" + key + "'");
}

struct Field {
  std::string key;
  std::function<void(TrainConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const TrainConfig&)> get;
};

template <typename T>
Field field(std::string key, T TrainConfig::*member) {
  Field f;
  f.key = std::move(key);
  f.set = [member](TrainConfig& c, const std::string& k, const std::string& v) {
    if constexpr (std::is_same_v<T, std::string>) {
      c.*member = v;
    } else if constexpr (std::is_same_v<T, bool>) {
      c.*member = parse_bool(k, v);
    } else {
      c.*member = parse_number<T>(k, v);
    }
  };
  f.get = [member](const TrainConfig& c) -> std::string {
    if constexpr (std::is_same_v<T, std::string>) {
      return c.*member;
    } else if constexpr (std::is_same_v<T, bool>) {
      return c.*member ? "true" : "false";
    } else if constexpr (std::is_floating_point_v<T>) {
      return format_double(c.*member);
    } else {
      return std::to_string(c.*member);
    }
  };
  return f;
}

Field flag(std::string key, bool AblationFlags::*member) {
  Field f;
  f.key = std::move(key);
  f.set = [member](TrainConfig& c, const std::string& k, const std::string& v) { c.ablations.*member = parse_bool(k, v); };
  f.get = [member](const TrainConfig& c) -> std::string { return c.ablations.*member ? "true" : "false"; };
  return f;
}

const std::vector<Field>& fields() {
  static const std::vector<Field> all = {
      field("task", &TrainConfig::task),
      field("train", &TrainConfig::train_path),
      field("dev", &TrainConfig::dev_path),
      field("test", &TrainConfig::test_path),
      field("max_len", &TrainConfig::max_len),
      field("batch_size", &TrainConfig::batch_size),
      field("seed", &TrainConfig::seed),
      field("lr", &TrainConfig::lr),
      field("beta1", &TrainConfig::beta1),
      field("beta2", &TrainConfig::beta2),
      field("eps", &TrainConfig::eps),
      field("dropout", &TrainConfig::dropout),
      field("epochs", &TrainConfig::epochs),
      field("hidden", &TrainConfig::hidden),
      field("kernel", &TrainConfig::kernel),
      field("conv_layers", &TrainConfig::conv_layers),
      field("static_dim", &TrainConfig::static_dim),
      field("contextual_dim", &TrainConfig::contextual_dim),
      field("glove", &TrainConfig::glove_path),
      field("contextual_cache", &TrainConfig::contextual_cache),
      field("vocab", &TrainConfig::vocab_path),
      field("freeze_embeddings", &TrainConfig::freeze_embeddings),
      field("loss_sum", &TrainConfig::loss_sum),
      field("pooling", &TrainConfig::pooling),
      field("clip_norm", &TrainConfig::clip_norm),
      field("patience", &TrainConfig::patience),
      field("include_no_answer", &TrainConfig::include_no_answer),
      field("threads", &TrainConfig::threads),
      field("out_dir", &TrainConfig::out_dir),
      flag("no_elmo", &AblationFlags::no_elmo),
      flag("no_alignment", &AblationFlags::no_alignment),
      flag("no_fusion", &AblationFlags::no_fusion),
      flag("no_self_attention", &AblationFlags::no_self_attention),
      flag("only_h2p", &AblationFlags::only_h2p),
      flag("only_p2h", &AblationFlags::only_p2h),
  };
  return all;
}

const Field& find_field(const std::string& key) {
  for (const auto& f : fields())
    if (f.key == key) return f;
  std::string valid;
  for (const auto& f : fields()) valid += (valid.empty() ? "" : ", ") + f.key;
  throw ConfigError("unknown config key '" + key + "'; valid keys: " + valid);
}

}  // namespace

void TrainConfig::validate() const {
  task_id();
  if (!(lr > 0.0)) throw ConfigError("lr must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("Adam betas must lie in [0, 1)");
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (hidden == 0 || static_dim == 0) throw ConfigError("hidden and static_dim must be positive");
  if (kernel % 2 == 0) throw ConfigError("kernel must be odd");
  if (clip_norm < 0.0) throw ConfigError("clip_norm must be non-negative");
  if (threads == 0) throw ConfigError("threads must be positive");
  pooling_mode();
  ablations.validate();
}

Pooling TrainConfig::pooling_mode() const {
  if (pooling == "splice") return Pooling::Splice;
  if (pooling == "mean_max") return Pooling::MeanMax;
  throw ConfigError("pooling must be 'splice' or 'mean_max', got '" + pooling + "'");
}

ModelConfig TrainConfig::model_config() const {
  ModelConfig m;
  m.embedding_dim = static_dim + effective_contextual_dim();
  m.hidden = hidden;
  m.kernel = kernel;
  m.conv_layers = conv_layers;
  m.kind = info().kind;
  m.num_classes = info().num_classes;
  m.ablations = ablations;
  m.pooling = pooling_mode();
  return m;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& f : fields()) out.push_back(f.key);
    return out;
  }();
  return keys;
}

void set_config_value(TrainConfig& config, const std::string& key, const std::string& value) {
  find_field(key).set(config, key, value);
}

std::string get_config_value(const TrainConfig& config, const std::string& key) { return find_field(key).get(config); }

void apply_config_text(TrainConfig& config, const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": expected key=value");
    }
    set_config_value(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

TrainConfig load_config_file(const std::string& path, TrainConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream text;
  text << in.rdbuf();
  apply_config_text(base, text.str(), path);
  return base;
}

std::string config_to_text(const TrainConfig& config) {
  std::string out;
  for (const auto& f : fields()) out += f.key + "=" + f.get(config) + "\n";
  return out;
}

}  // namespace deim
