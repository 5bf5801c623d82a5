#include "deim/embedding.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "deim/binary_io.hpp"
#include "deim/errors.hpp"

namespace deim {

namespace {

constexpr char kCacheMagic[8] = {'D', 'E', 'I', 'M', 'C', 'T', 'X', '1'};

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<std::string_view> split_spaces(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

}  // namespace

ContextualCache ContextualCache::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open contextual cache " + path);
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kCacheMagic, 8) != 0) {
    throw ParseError(path + ": not a contextual cache (bad magic)");
  }
  const auto dim = io::read_le<std::uint32_t>(in, path);
  const auto count = io::read_le<std::uint64_t>(in, path);
  ContextualCache cache(dim);
  for (std::uint64_t r = 0; r < count; ++r) {
    std::string id = io::read_string(in, path);
    const auto tokens = io::read_le<std::uint32_t>(in, path);
    std::vector<float> values(static_cast<std::size_t>(tokens) * dim);
    for (float& v : values) v = io::read_le<float>(in, path);
    cache.insert(id, tokens, std::move(values));
  }
  return cache;
}

void ContextualCache::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write contextual cache " + path);
  out.write(kCacheMagic, 8);
  io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(dim_));
  io::write_le<std::uint64_t>(out, records_.size());
  for (const auto& [id, rec] : records_) {
    io::write_string(out, id);
    io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(rec.tokens));
    for (float v : rec.values) io::write_le<float>(out, v);
  }
}

void ContextualCache::insert(const std::string& sentence_id, std::size_t tokens, std::vector<float> values) {
  if (values.size() != tokens * dim_) {
    throw DataError("contextual record '" + sentence_id + "' has " + std::to_string(values.size()) +
                    " values, expected " + std::to_string(tokens) + " x " + std::to_string(dim_));
  }
  records_[sentence_id] = Record{tokens, std::move(values)};
}

std::vector<double> ContextualCache::vectors(const std::string& sentence_id, std::size_t len) const {
  auto it = records_.find(sentence_id);
  if (it == records_.end()) throw CacheMissError("contextual cache has no entry for sentence '" + sentence_id + "'");
  if (it->second.tokens != len) {
    throw DataError("contextual entry for '" + sentence_id + "' has " + std::to_string(it->second.tokens) +
                    " tokens, sentence has " + std::to_string(len));
  }
  return std::vector<double>(it->second.values.begin(), it->second.values.end());
}

std::vector<double> StubContextualProvider::vectors(const std::string& sentence_id, std::size_t len) const {
  const auto tokens = split_spaces(sentence_id);
  if (tokens.size() != len) {
    throw DataError("stub contextual provider: sentence '" + sentence_id + "' has " +
                    std::to_string(tokens.size()) + " tokens, expected " + std::to_string(len));
  }
  std::vector<double> out(len * dim_);
  for (std::size_t t = 0; t < len; ++t) {
    Rng rng(Rng::derive(seed_, fnv1a(tokens[t]), t));
    for (std::size_t j = 0; j < dim_; ++j) out[t * dim_ + j] = rng.uniform(-0.5, 0.5);
  }
  return out;
}

Tensor random_static_vectors(const Vocab& vocab, std::size_t dim, Rng& rng) {
  if (dim == 0) throw ConfigError("static embedding dimension must be positive");
  std::vector<double> v(vocab.size() * dim);
  for (double& x : v) x = rng.uniform(-kUnknownInitRange, kUnknownInitRange);
  std::fill_n(v.begin() + Vocab::kPad * dim, dim, 0.0);
  return Tensor({vocab.size(), dim}, std::move(v), true);
}

Tensor load_static_vectors(const std::string& path, const Vocab& vocab, std::size_t dim, Rng& rng,
                           StaticLoadStats* stats) {
  Tensor table = random_static_vectors(vocab, dim, rng);
  auto values = table.mutable_values();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open static vectors " + path);
  StaticLoadStats local;
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> row(dim);
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = split_spaces(line);
    if (fields.empty()) continue;
    ++local.lines;
    if (fields.size() - 1 != dim) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                       " floats, found " + std::to_string(fields.size() - 1));
    }
    for (std::size_t j = 0; j < dim; ++j) {
      const auto f = fields[j + 1];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), row[j]);
      if (ec != std::errc() || ptr != f.data() + f.size()) {
        throw ParseError(path + ":" + std::to_string(line_no) + ": malformed float '" + std::string(f) + "'");
      }
    }
    const std::string token(fields[0]);
    if (!vocab.contains(token)) continue;
    const TokenId id = vocab.id(token);
    if (id == Vocab::kPad) continue;
    std::copy(row.begin(), row.end(), values.begin() + static_cast<std::size_t>(id) * dim);
    ++local.matched;
  }
  if (stats) *stats = local;
  return table;
}

EmbeddedPair embed_pair(const TokenizedPair& pair, const EmbeddingTable& table, bool track_grad) {
  const std::size_t d1 = table.static_dim();
  const std::size_t d2 = table.contextual_dim();
  const std::size_t width = d1 + d2;
  const auto statics = table.static_vectors.values();
  const std::size_t vocab_size = table.static_vectors.rows();

  auto embed = [&](const std::vector<TokenId>& ids, const std::vector<std::uint8_t>& mask, std::size_t len,
                   const std::string& sentence_id) {
    std::vector<double> out(ids.size() * width, 0.0);
    std::vector<double> ctx;
    if (d2 > 0) ctx = table.contextual->vectors(sentence_id, len);
    std::size_t position = 0;  // index among unmasked tokens
    for (std::size_t t = 0; t < ids.size(); ++t) {
      if (!mask[t]) continue;
      const auto id = static_cast<std::size_t>(ids[t]);
      if (id >= vocab_size) throw DataError("token id " + std::to_string(id) + " outside embedding table");
      std::copy_n(statics.begin() + id * d1, d1, out.begin() + t * width);
      if (d2 > 0) std::copy_n(ctx.begin() + position * d2, d2, out.begin() + t * width + d1);
      ++position;
    }
    return Tensor({ids.size(), width}, std::move(out), track_grad);
  };
  return {embed(pair.ids_a, pair.mask_a, pair.len_a, pair.sentence_id_a),
          embed(pair.ids_b, pair.mask_b, pair.len_b, pair.sentence_id_b)};
}

void scatter_static_grad(const Tensor& embedded, std::span<const TokenId> ids, std::span<const std::uint8_t> mask,
                         std::size_t static_dim, std::span<double> grad_out) {
  if (!embedded.has_grad()) return;
  const auto g = embedded.grad();
  const std::size_t width = embedded.cols();
  for (std::size_t t = 0; t < ids.size(); ++t) {
    if (!mask[t]) continue;
    const auto id = static_cast<std::size_t>(ids[t]);
    for (std::size_t j = 0; j < static_dim; ++j) grad_out[id * static_dim + j] += g[t * width + j];
  }
}

}  // namespace deim
