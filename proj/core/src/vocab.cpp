#include "negexlm/vocab.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>

#include "negexlm/text_io.hpp"

namespace negexlm {

Vocabulary::Vocabulary() {
  insert(std::string(kUnkToken));
  insert(std::string(kBosToken));
  insert(std::string(kEosToken));
}

void Vocabulary::insert(std::string token) {
  if (token.empty()) throw std::invalid_argument("empty token in vocabulary");
  const auto id = static_cast<TokenId>(tokens_.size());
  if (!index_.emplace(token, id).second) throw std::invalid_argument("duplicate vocabulary token: " + token);
  tokens_.push_back(std::move(token));
}

Vocabulary Vocabulary::build(std::span<const std::vector<std::string>> sentences, std::size_t min_freq) {
  if (sentences.empty()) throw std::invalid_argument("cannot build a vocabulary from an empty corpus");
  std::map<std::string, std::size_t> counts;
  for (const auto& s : sentences) {
    for (const auto& t : s) ++counts[t];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked;
  for (auto& [tok, n] : counts) {
    if (n >= min_freq && tok != kUnkToken && tok != kBosToken && tok != kEosToken) ranked.emplace_back(tok, n);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocabulary v;
  v.min_freq_ = min_freq;
  for (auto& [tok, n] : ranked) v.insert(tok);
  return v;
}

Vocabulary Vocabulary::from_tokens(std::span<const std::string> tokens, std::size_t min_freq) {
  Vocabulary v;
  v.min_freq_ = min_freq;
  for (const auto& t : tokens) v.insert(t);
  return v;
}

bool Vocabulary::contains(std::string_view token) const { return index_.contains(std::string(token)); }

TokenId Vocabulary::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id >= tokens_.size()) throw std::out_of_range("token id out of range: " + std::to_string(id));
  return tokens_[id];
}

TokenIds Vocabulary::encode(std::span<const std::string> tokens) const {
  TokenIds out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t));
  return out;
}

std::vector<std::string> Vocabulary::decode(std::span<const TokenId> ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (auto i : ids) out.push_back(token(i));
  return out;
}

std::string Vocabulary::serialize() const {
  std::ostringstream os;
  os << "# min_freq=" << min_freq_ << '\n';
  for (const auto& t : entries()) os << t << '\n';
  return os.str();
}

Vocabulary Vocabulary::parse(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t min_freq = 1;
  bool first = true;
  for (const auto& line : split_lines(text)) {
    if (first && line.starts_with("# min_freq=")) {
      min_freq = std::stoul(std::string(line.substr(11)));
      first = false;
      continue;
    }
    first = false;
    if (line.empty()) continue;
    tokens.emplace_back(line);
  }
  return from_tokens(tokens, min_freq);
}

void Vocabulary::save(const std::filesystem::path& path) const { write_file(path, serialize()); }

Vocabulary Vocabulary::load(const std::filesystem::path& path) { return parse(read_file(path)); }

}  // namespace negexlm
