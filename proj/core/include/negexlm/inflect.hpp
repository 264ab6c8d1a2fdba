#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace negexlm::negex {

enum class Number { kSingular, kPlural };

constexpr Number flip(Number n) { return n == Number::kSingular ? Number::kPlural : Number::kSingular; }
std::string_view number_name(Number n);
/// "singular" or "plural"; anything else throws std::invalid_argument.
Number parse_number(std::string_view s);

/// Present-tense number inflection. Irregular forms come from a table with
/// lines "singular<TAB>plural<TAB>lemma"; everything else uses suffix rules.
class Inflector {
 public:
  /// Built from the verb table compiled into the library.
  Inflector();
  explicit Inflector(std::string_view table_text);

  /// Opposite-number form of a present-tense verb. Throws
  /// std::invalid_argument("not inflectable") for anything that is not an
  /// analyzable present form (past forms such as "was" included).
  std::string flip_verb_number(std::string_view surface, Number from) const;

  /// Base form used by the ablation filters ("laughs" -> "laugh", "is" -> "be").
  std::string lemma(std::string_view surface, Number number) const;

  /// Maps a word to its lemma when it is a table form, otherwise returns it.
  std::string normalize_lemma(std::string_view word) const;

 private:
  struct Entry {
    std::string singular;
    std::string plural;
    std::string lemma;
  };
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> by_singular_;
  std::unordered_map<std::string, std::size_t> by_plural_;
};

/// Reflexive number flip: themselves -> {himself, herself}, himself/herself ->
/// {themselves}. Other tokens throw std::invalid_argument.
std::vector<std::string> flip_reflexive(std::string_view surface);
bool is_reflexive(std::string_view token);
/// Number of a reflexive pronoun.
Number reflexive_number(std::string_view surface);

}  // namespace negexlm::negex
