#pragma once

#include <string>
#include <vector>

#include "deim/config.hpp"
#include "deim/tensor.hpp"
#include "deim/vocab.hpp"

namespace deim {

struct TensorRecord {
  std::string name;
  Shape shape;
  std::vector<double> values;
};

/// Named-tensor container, all integers and floats little-endian:
///   magic  8 bytes "DEIMTNS1"
///   count  u64
///   count x record:
///     name   u32 length + bytes
///     rank   u32
///     dims   rank x u64
///     values prod(dims) x f64
void write_tensor_file(const std::string& path, const std::vector<TensorRecord>& tensors);
std::vector<TensorRecord> read_tensor_file(const std::string& path);

/// Everything needed to resume or evaluate a run. A checkpoint directory
/// holds model.bin (tensors), manifest.txt (run state and config) and
/// vocab.txt.
struct Checkpoint {
  TrainConfig config;
  Vocab vocab;
  std::vector<TensorRecord> tensors;  // parameters, "embedding.static", "adam.m/..." and "adam.v/..."
  std::size_t epoch = 0;
  std::size_t step = 0;
  std::string rng_state;
  std::string fingerprint;

  const TensorRecord& tensor(const std::string& name) const;
  bool has_tensor(const std::string& name) const;

  void save(const std::string& dir) const;
  static Checkpoint load(const std::string& dir);
};

}  // namespace deim
