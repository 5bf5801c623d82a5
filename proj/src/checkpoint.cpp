#include "deim/checkpoint.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "deim/binary_io.hpp"
#include "deim/errors.hpp"

namespace deim {

namespace {

constexpr char kTensorMagic[8] = {'D', 'E', 'I', 'M', 'T', 'N', 'S', '1'};
constexpr const char* kManifestFormat = "deim-checkpoint-1";

std::string read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

void write_tensor_file(const std::string& path, const std::vector<TensorRecord>& tensors) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out.write(kTensorMagic, 8);
  io::write_le<std::uint64_t>(out, tensors.size());
  for (const auto& t : tensors) {
    if (numel(t.shape) != t.values.size()) throw DimensionError("tensor '" + t.name + "' shape does not match values");
    io::write_string(out, t.name);
    io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.shape.size()));
    for (std::size_t d : t.shape) io::write_le<std::uint64_t>(out, d);
    for (double v : t.values) io::write_le<double>(out, v);
  }
  if (!out) throw DataError("write failed for " + path);
}

std::vector<TensorRecord> read_tensor_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kTensorMagic, 8) != 0) {
    throw ParseError(path + ": not a tensor file (bad magic)");
  }
  const auto count = io::read_le<std::uint64_t>(in, path);
  std::vector<TensorRecord> out;
  for (std::uint64_t i = 0; i < count; ++i) {
    TensorRecord t;
    t.name = io::read_string(in, path);
    const auto rank = io::read_le<std::uint32_t>(in, path);
    for (std::uint32_t r = 0; r < rank; ++r) t.shape.push_back(io::read_le<std::uint64_t>(in, path));
    t.values.resize(numel(t.shape));
    for (double& v : t.values) v = io::read_le<double>(in, path);
    out.push_back(std::move(t));
  }
  return out;
}

const TensorRecord& Checkpoint::tensor(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return t;
  throw DataError("checkpoint has no tensor '" + name + "'");
}

bool Checkpoint::has_tensor(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return true;
  return false;
}

void Checkpoint::save(const std::string& dir) const {
  std::filesystem::create_directories(dir);
  write_tensor_file(dir + "/model.bin", tensors);
  vocab.save(dir + "/vocab.txt");
  std::ofstream out(dir + "/manifest.txt", std::ios::binary);
  if (!out) throw DataError("cannot write " + dir + "/manifest.txt");
  out << "format=" << kManifestFormat << "\n";
  out << "epoch=" << epoch << "\n";
  out << "step=" << step << "\n";
  out << "fingerprint=" << fingerprint << "\n";
  out << "rng_state=" << rng_state << "\n";
  out << "[config]\n" << config_to_text(config);
  out << "[tensors]\n";
  for (const auto& t : tensors) out << t.name << " " << to_string(t.shape) << "\n";
}

Checkpoint Checkpoint::load(const std::string& dir) {
  if (!std::filesystem::is_directory(dir)) throw DataError("checkpoint directory not found: " + dir);
  Checkpoint c;
  std::istringstream manifest(read_all(dir + "/manifest.txt"));
  std::string line;
  std::string section;
  std::string config_text;
  bool format_ok = false;
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    if (line.front() == '[') {
      section = line;
      continue;
    }
    if (section == "[config]") {
      config_text += line + "\n";
      continue;
    }
    if (!section.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(dir + "/manifest.txt: malformed line '" + line + "'");
    const std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    if (key == "format") format_ok = value == kManifestFormat;
    else if (key == "epoch") c.epoch = std::stoull(value);
    else if (key == "step") c.step = std::stoull(value);
    else if (key == "fingerprint") c.fingerprint = value;
    else if (key == "rng_state") c.rng_state = value;
  }
  if (!format_ok) throw ParseError(dir + "/manifest.txt: unsupported checkpoint format");
  apply_config_text(c.config, config_text, dir + "/manifest.txt");
  c.vocab = Vocab::load(dir + "/vocab.txt");
  c.tensors = read_tensor_file(dir + "/model.bin");
  return c;
}

}  // namespace deim
