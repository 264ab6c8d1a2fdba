#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "negexlm/inflect.hpp"

namespace negexlm::corpus {

enum class Category {
  kNoun,
  kIntransitive,   // iverb: animate subject, no object
  kTransitive,     // tverb: animate subject and object
  kLongVp,         // lvp: multiword verb phrase, inflected on its first word
  kInanimatePred,  // ipred: predicate for inanimate subjects
  kPrep,
  kAdj,
  kCompVerb,       // cverb: past-tense verb taking a sentential complement
  kReflVerb,       // rverb: past-tense verb taking a reflexive object
};

std::string_view category_name(Category c);
Category parse_category(std::string_view s);

/// suite words appear in evaluation templates, train words only in the
/// training corpus, both in either.
enum class Pool { kSuite, kTrain, kBoth };

struct LexEntry {
  Category category = Category::kNoun;
  std::vector<std::string> singular;  // words of the singular form
  std::vector<std::string> plural;
  bool animate = false;
  Pool pool = Pool::kBoth;

  const std::vector<std::string>& form(negex::Number n) const {
    return n == negex::Number::kSingular ? singular : plural;
  }
  bool inflects() const { return singular != plural; }
};

/// Which entries a generator may draw from.
enum class Usage {
  kSuite,         // suite and both
  kTraining,      // every entry
  kTrainingOnly,  // train and both
};

/// Closed word list for the template grammar. Text format: tab-separated
/// "category singular plural animacy pool" lines, '#' comments.
class Lexicon {
 public:
  Lexicon() = default;
  static Lexicon parse(std::string_view text);
  static Lexicon load(const std::filesystem::path& path);
  /// The lexicon compiled into the library.
  static const Lexicon& builtin();

  std::span<const LexEntry> entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  /// Entries of a category usable under `usage`; animacy filters nouns
  /// (-1 any, 0 inanimate, 1 animate).
  std::vector<const LexEntry*> select(Category c, Usage usage, int animacy = -1) const;

  /// Noun entry whose singular or plural form is `word`, or null.
  const LexEntry* find_noun(std::string_view word) const;

  /// Every distinct surface word.
  std::vector<std::string> words() const;

 private:
  std::vector<LexEntry> entries_;
};

/// Best-effort closed-lexicon tagger for raw text. NN/NNS for nouns, PRP for
/// reflexives, DT for determiners. A present form of a lexicon or table verb
/// is tagged VBZ/VBP only right after a noun, "that" or "and"; elsewhere
/// ("like the guards", "after work") it is not a target. X otherwise.
std::vector<std::string> tag_tokens(std::span<const std::string> tokens, const Lexicon& lexicon);

}  // namespace negexlm::corpus
