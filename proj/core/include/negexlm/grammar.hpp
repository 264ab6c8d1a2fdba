#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "negexlm/lexicon.hpp"
#include "negexlm/rng.hpp"

namespace negexlm::corpus {

enum class SlotKind {
  kLiteral,
  kNoun,
  kIntransitive,
  kTransitive,
  kLongVp,
  kInanimatePred,
  kBe,
  kHave,
  kReflexive,
  kNpi,  // "no", with "most" as its ungrammatical alternative
  kPrep,
  kAdj,
  kCompVerb,
  kReflVerb,
};

struct Slot {
  SlotKind kind = SlotKind::kLiteral;
  std::string literal;
  int index = -1;     // noun slots: noun index
  int agree = -1;     // agreeing slots: index of the controlling noun
  int animacy = -1;   // noun slots: -1 any, 0 inanimate, 1 animate
  bool plural_only = false;
  bool target = false;
};

/// Sentence template shared by the generator and the agreement checker.
///
/// Pattern syntax, space separated: N<i>[:a|:i][:pl] noun, IV<i> TV<i> LVP<i>
/// IP<i> BE<i> HAVE<i> REFL<i> agreeing with noun i, NPI the "no" slot, P ADJ
/// CV RV non-agreeing categories, anything else a literal word. A trailing
/// '*' marks the critical slot of a minimal pair.
struct Template {
  std::string construction;
  std::vector<Slot> slots;
  std::size_t target_slot = static_cast<std::size_t>(-1);
};

Template parse_template(std::string construction, std::string_view pattern);

/// Templates behind the training corpus, tagged with corpus construction tags.
const std::vector<Template>& training_templates();
/// Templates behind the evaluation suite, one group per suite construction.
const std::vector<Template>& suite_templates();

/// Templates of a tag from either table. Unknown tags throw std::invalid_argument.
std::vector<const Template*> templates_for(std::string_view construction);

struct Realization {
  std::vector<std::string> tokens;
  std::vector<std::string> tags;  // gold part-of-speech tags
  std::string construction;
  std::size_t target_position = static_cast<std::size_t>(-1);
  std::string alternative;  // ungrammatical token at target_position
  bool head_animate = false;
};

/// Fills a template. Nouns are drawn under noun_usage, all other words under
/// word_usage; numbers are uniform except plural-only slots.
Realization realize(const Template& t, const Lexicon& lexicon, Usage noun_usage, Usage word_usage, Rng& rng);

/// True when the tokens match some template of the construction with every
/// agreement satisfied. Unknown tags throw std::invalid_argument.
bool is_grammatical(std::span<const std::string> tokens, std::string_view construction, const Lexicon& lexicon);

}  // namespace negexlm::corpus
