#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace negexlm {

using TokenId = std::uint32_t;
using TokenIds = std::vector<TokenId>;

/// Token <-> id bijection with reserved ids for the unknown token and the
/// sentence boundary markers.
class Vocabulary {
 public:
  static constexpr TokenId kUnk = 0;
  static constexpr TokenId kBos = 1;
  static constexpr TokenId kEos = 2;
  static constexpr std::string_view kUnkToken = "<unk>";
  static constexpr std::string_view kBosToken = "<s>";
  static constexpr std::string_view kEosToken = "</s>";

  Vocabulary();

  /// Tokens with frequency >= min_freq, ordered by frequency (descending)
  /// then lexicographically.
  static Vocabulary build(std::span<const std::vector<std::string>> sentences, std::size_t min_freq);

  /// Vocabulary from an explicit list of non-reserved tokens, in id order.
  static Vocabulary from_tokens(std::span<const std::string> tokens, std::size_t min_freq = 1);

  std::size_t size() const { return tokens_.size(); }
  std::size_t min_freq() const { return min_freq_; }

  bool contains(std::string_view token) const;
  /// Id of token, kUnk when out of vocabulary.
  TokenId id(std::string_view token) const;
  const std::string& token(TokenId id) const;
  /// Non-reserved tokens in id order.
  std::span<const std::string> entries() const { return {tokens_.data() + 3, tokens_.size() - 3}; }

  TokenIds encode(std::span<const std::string> tokens) const;
  std::vector<std::string> decode(std::span<const TokenId> ids) const;

  /// Text form: a "# min_freq=N" line followed by one non-reserved token per line.
  std::string serialize() const;
  static Vocabulary parse(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_ && a.min_freq_ == b.min_freq_;
  }

 private:
  void insert(std::string token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  std::size_t min_freq_ = 1;
};

}  // namespace negexlm
