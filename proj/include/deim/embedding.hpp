#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "deim/pair.hpp"
#include "deim/rng.hpp"
#include "deim/tensor.hpp"
#include "deim/vocab.hpp"

namespace deim {

/// Source of per-occurrence (contextual) word vectors, keyed by sentence id.
class ContextualProvider {
 public:
  virtual ~ContextualProvider() = default;
  virtual std::size_t dim() const = 0;
  /// len x dim row-major vectors for the sentence. Throws CacheMissError
  /// when the sentence is unknown and DataError when its length differs.
  virtual std::vector<double> vectors(const std::string& sentence_id, std::size_t len) const = 0;
};

/// Precomputed contextual vectors loaded from a cache file.
///
/// File layout (all integers and floats little-endian):
///   magic   8 bytes  "DEIMCTX1"
///   dim     u32      vector width
///   count   u64      number of records
///   count x record:
///     id_len  u32, id bytes (UTF-8 sentence id)
///     tokens  u32
///     tokens x dim float32 values, row-major
class ContextualCache : public ContextualProvider {
 public:
  explicit ContextualCache(std::size_t dim) : dim_(dim) {}

  static ContextualCache load(const std::string& path);
  void save(const std::string& path) const;

  void insert(const std::string& sentence_id, std::size_t tokens, std::vector<float> values);
  std::size_t size() const { return records_.size(); }

  std::size_t dim() const override { return dim_; }
  std::vector<double> vectors(const std::string& sentence_id, std::size_t len) const override;

 private:
  struct Record {
    std::size_t tokens = 0;
    std::vector<float> values;
  };
  std::size_t dim_;
  std::map<std::string, Record> records_;
};

/// Deterministic stand-in for a contextual model: each (token, position)
/// hashes to a fixed vector in [-0.5, 0.5]^dim. Used by tests and when no
/// cache file is configured.
class StubContextualProvider : public ContextualProvider {
 public:
  StubContextualProvider(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {}
  std::size_t dim() const override { return dim_; }
  std::vector<double> vectors(const std::string& sentence_id, std::size_t len) const override;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

/// Static vectors (|V| x d1, PAD row zero) plus an optional contextual source
/// of width d2. Word representation width is d1 + d2.
struct EmbeddingTable {
  Tensor static_vectors;
  std::shared_ptr<const ContextualProvider> contextual;

  std::size_t static_dim() const { return static_vectors.cols(); }
  std::size_t contextual_dim() const { return contextual ? contextual->dim() : 0; }
  std::size_t dim() const { return static_dim() + contextual_dim(); }
};

constexpr double kUnknownInitRange = 0.05;

/// |V| x dim matrix, uniform in [-0.05, 0.05] except the zero PAD row.
Tensor random_static_vectors(const Vocab& vocab, std::size_t dim, Rng& rng);

struct StaticLoadStats {
  std::size_t lines = 0;
  std::size_t matched = 0;
};

/// Reads "token f1 ... fdim" lines. Vocabulary tokens found in the file take
/// its vector; the rest keep their random init. Throws ParseError naming the
/// line when a line's float count differs from `dim`.
Tensor load_static_vectors(const std::string& path, const Vocab& vocab, std::size_t dim, Rng& rng,
                           StaticLoadStats* stats = nullptr);

struct EmbeddedPair {
  Tensor x;  // n x (d1 + d2)
  Tensor y;  // m x (d1 + d2)
};

/// Row t = [static(token_t); contextual_t]; PAD rows are all zero. With
/// `track_grad`, X and Y are gradient-tracking leaves so the static part of
/// their gradient can be scattered back with scatter_static_grad.
EmbeddedPair embed_pair(const TokenizedPair& pair, const EmbeddingTable& table, bool track_grad = false);

/// Adds the static columns of `embedded`'s gradient into row ids[t] of
/// `grad_out` (|V| x d1, row-major) for every unmasked position.
void scatter_static_grad(const Tensor& embedded, std::span<const TokenId> ids,
                         std::span<const std::uint8_t> mask, std::size_t static_dim,
                         std::span<double> grad_out);

}  // namespace deim
