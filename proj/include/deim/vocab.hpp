#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace deim {

using TokenId = std::int32_t;

/// Lowercases ASCII letters and splits on whitespace; every ASCII
/// punctuation character becomes its own token. Bytes >= 0x80 are kept as
/// word characters so UTF-8 words stay intact.
std::vector<std::string> tokenize(std::string_view text);

/// Token <-> id map with PAD = 0 and UNK = 1 always present.
class Vocab {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kUnk = 1;
  static constexpr std::string_view kPadToken = "<pad>";
  static constexpr std::string_view kUnkToken = "<unk>";

  Vocab();

  /// Adds the token if absent; returns its id.
  TokenId add(const std::string& token);
  /// Id of the token, or kUnk.
  TokenId id(const std::string& token) const;
  bool contains(const std::string& token) const;
  const std::string& token(TokenId id) const;
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::vector<TokenId> encode(std::span<const std::string> tokens) const;

  /// One token per line; line index is the id.
  void save(const std::string& path) const;
  static Vocab load(const std::string& path);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
};

}  // namespace deim
