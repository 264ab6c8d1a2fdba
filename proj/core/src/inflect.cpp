#include "negexlm/inflect.hpp"

#include <algorithm>
#include <stdexcept>

#include "negexlm/embedded_data.hpp"
#include "negexlm/text_io.hpp"

namespace negexlm::negex {

std::string_view number_name(Number n) { return n == Number::kSingular ? "singular" : "plural"; }

Number parse_number(std::string_view s) {
  if (s == "singular") return Number::kSingular;
  if (s == "plural") return Number::kPlural;
  throw std::invalid_argument("unknown number '" + std::string(s) + "'");
}

Inflector::Inflector() : Inflector(data::builtin_verb_table()) {}

Inflector::Inflector(std::string_view table_text) {
  std::size_t line_no = 0;
  for (std::string_view raw : split_lines(table_text)) {
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto fields = split_whitespace(line);
    if (fields.size() != 3) {
      throw std::invalid_argument("verb table line " + std::to_string(line_no) + ": expected 3 fields");
    }
    by_singular_.emplace(fields[0], entries_.size());
    by_plural_.emplace(fields[1], entries_.size());
    entries_.push_back({fields[0], fields[1], fields[2]});
  }
}

namespace {

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

bool all_lower_alpha(std::string_view w) {
  return !w.empty() && std::all_of(w.begin(), w.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

bool takes_es(std::string_view stem) {
  return stem.ends_with("s") || stem.ends_with("x") || stem.ends_with("z") || stem.ends_with("ch") ||
         stem.ends_with("sh") || stem.ends_with("o");
}

[[noreturn]] void not_inflectable(std::string_view surface) {
  throw std::invalid_argument("not inflectable: '" + std::string(surface) + "'");
}

std::string singular_to_plural(std::string_view w) {
  if (w.size() < 2 || !w.ends_with("s") || w.ends_with("ss") || w.ends_with("us")) not_inflectable(w);
  if (w.size() > 4 && w.ends_with("ies") && !is_vowel(w[w.size() - 4])) {
    return std::string(w.substr(0, w.size() - 3)) + "y";
  }
  if (w.size() > 3 && w.ends_with("es")) {
    std::string_view stem = w.substr(0, w.size() - 2);
    if (takes_es(stem)) {
      // "uses" -> "use" but "misses" -> "miss"
      const bool single_sibilant = (stem.ends_with("s") && !stem.ends_with("ss")) ||
                                   (stem.ends_with("z") && !stem.ends_with("zz"));
      return std::string(single_sibilant ? w.substr(0, w.size() - 1) : stem);
    }
  }
  return std::string(w.substr(0, w.size() - 1));
}

std::string plural_to_singular(std::string_view w) {
  if (w.size() >= 2 && w.ends_with("y") && !is_vowel(w[w.size() - 2])) {
    return std::string(w.substr(0, w.size() - 1)) + "ies";
  }
  if (takes_es(w)) return std::string(w) + "es";
  return std::string(w) + "s";
}

}  // namespace

std::string Inflector::flip_verb_number(std::string_view surface, Number from) const {
  if (surface == "was" || surface == "were") not_inflectable(surface);
  if (from == Number::kSingular) {
    if (auto it = by_singular_.find(std::string(surface)); it != by_singular_.end()) {
      return entries_[it->second].plural;
    }
    if (by_plural_.contains(std::string(surface)) || !all_lower_alpha(surface)) not_inflectable(surface);
    return singular_to_plural(surface);
  }
  if (auto it = by_plural_.find(std::string(surface)); it != by_plural_.end()) {
    return entries_[it->second].singular;
  }
  if (by_singular_.contains(std::string(surface)) || !all_lower_alpha(surface)) not_inflectable(surface);
  return plural_to_singular(surface);
}

std::string Inflector::lemma(std::string_view surface, Number number) const {
  const auto& table = number == Number::kSingular ? by_singular_ : by_plural_;
  if (auto it = table.find(std::string(surface)); it != table.end()) return entries_[it->second].lemma;
  return number == Number::kSingular ? flip_verb_number(surface, number) : std::string(surface);
}

std::string Inflector::normalize_lemma(std::string_view word) const {
  if (auto it = by_singular_.find(std::string(word)); it != by_singular_.end()) return entries_[it->second].lemma;
  if (auto it = by_plural_.find(std::string(word)); it != by_plural_.end()) return entries_[it->second].lemma;
  return std::string(word);
}

std::vector<std::string> flip_reflexive(std::string_view surface) {
  if (surface == "themselves") return {"himself", "herself"};
  if (surface == "himself" || surface == "herself") return {"themselves"};
  throw std::invalid_argument("not a reflexive: '" + std::string(surface) + "'");
}

bool is_reflexive(std::string_view token) {
  return token == "themselves" || token == "himself" || token == "herself";
}

Number reflexive_number(std::string_view surface) {
  if (surface == "themselves") return Number::kPlural;
  if (surface == "himself" || surface == "herself") return Number::kSingular;
  throw std::invalid_argument("not a reflexive: '" + std::string(surface) + "'");
}

}  // namespace negexlm::negex
