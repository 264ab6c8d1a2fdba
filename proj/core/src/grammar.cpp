#include "negexlm/grammar.hpp"

#include <algorithm>
#include <array>
#include <optional>
#include <stdexcept>

#include "negexlm/text_io.hpp"

namespace negexlm::corpus {

using negex::Number;

namespace {

constexpr std::size_t kNoTarget = static_cast<std::size_t>(-1);
constexpr int kMaxNouns = 4;

struct AgreeingPrefix {
  std::string_view prefix;
  SlotKind kind;
};

constexpr AgreeingPrefix kAgreeing[] = {
    {"HAVE", SlotKind::kHave}, {"REFL", SlotKind::kReflexive},   {"LVP", SlotKind::kLongVp},
    {"IV", SlotKind::kIntransitive}, {"TV", SlotKind::kTransitive}, {"IP", SlotKind::kInanimatePred},
    {"BE", SlotKind::kBe},
};

int parse_digit(std::string_view s, std::string_view pattern) {
  if (s.size() != 1 || s[0] < '0' || s[0] >= '0' + kMaxNouns) {
    throw std::invalid_argument("bad slot index in template '" + std::string(pattern) + "'");
  }
  return s[0] - '0';
}

Category category_of(SlotKind k) {
  switch (k) {
    case SlotKind::kNoun: return Category::kNoun;
    case SlotKind::kIntransitive: return Category::kIntransitive;
    case SlotKind::kTransitive: return Category::kTransitive;
    case SlotKind::kLongVp: return Category::kLongVp;
    case SlotKind::kInanimatePred: return Category::kInanimatePred;
    case SlotKind::kPrep: return Category::kPrep;
    case SlotKind::kAdj: return Category::kAdj;
    case SlotKind::kCompVerb: return Category::kCompVerb;
    case SlotKind::kReflVerb: return Category::kReflVerb;
    default: throw std::logic_error("slot kind has no lexicon category");
  }
}

bool is_lexical_verb(SlotKind k) {
  return k == SlotKind::kIntransitive || k == SlotKind::kTransitive || k == SlotKind::kLongVp ||
         k == SlotKind::kInanimatePred;
}

std::string_view number_form(SlotKind k, Number n) {
  const bool sg = n == Number::kSingular;
  if (k == SlotKind::kBe) return sg ? "is" : "are";
  return sg ? "has" : "have";
}

std::string_view fixed_tag(std::string_view word) {
  if (word == "the" || word == "no" || word == "most") return "DT";
  if (word == "that") return "WDT";
  if (word == "and") return "CC";
  if (word == "ever") return "RB";
  if (word == "been") return "VBN";
  if (word == "like") return "IN";
  if (word == ".") return ".";
  return "X";
}

}  // namespace

Template parse_template(std::string construction, std::string_view pattern) {
  Template t;
  t.construction = std::move(construction);
  std::array<bool, kMaxNouns> seen{};
  for (std::string piece : split_whitespace(pattern)) {
    Slot slot;
    if (piece.size() > 1 && piece.back() == '*') {
      slot.target = true;
      piece.pop_back();
    }
    std::string_view p = piece;
    bool parsed = false;
    if (p.size() >= 2 && p[0] == 'N' && p[1] >= '0' && p[1] <= '9') {
      auto parts = split(p.substr(1), ':');
      slot.kind = SlotKind::kNoun;
      slot.index = parse_digit(parts[0], pattern);
      for (std::size_t k = 1; k < parts.size(); ++k) {
        if (parts[k] == "a") {
          slot.animacy = 1;
        } else if (parts[k] == "i") {
          slot.animacy = 0;
        } else if (parts[k] == "pl") {
          slot.plural_only = true;
        } else {
          throw std::invalid_argument("bad noun option in template '" + std::string(pattern) + "'");
        }
      }
      seen[static_cast<std::size_t>(slot.index)] = true;
      parsed = true;
    }
    for (const auto& a : kAgreeing) {
      if (parsed) break;
      if (p.starts_with(a.prefix) && p.size() == a.prefix.size() + 1) {
        slot.kind = a.kind;
        slot.agree = parse_digit(p.substr(a.prefix.size()), pattern);
        if (!seen[static_cast<std::size_t>(slot.agree)]) {
          throw std::invalid_argument("agreeing slot before its noun in template '" + std::string(pattern) + "'");
        }
        parsed = true;
      }
    }
    if (!parsed) {
      if (p == "NPI") {
        slot.kind = SlotKind::kNpi;
      } else if (p == "P") {
        slot.kind = SlotKind::kPrep;
      } else if (p == "ADJ") {
        slot.kind = SlotKind::kAdj;
      } else if (p == "CV") {
        slot.kind = SlotKind::kCompVerb;
      } else if (p == "RV") {
        slot.kind = SlotKind::kReflVerb;
      } else {
        slot.kind = SlotKind::kLiteral;
        slot.literal = piece;
      }
    }
    if (slot.target) {
      if (t.target_slot != kNoTarget) throw std::invalid_argument("template has two targets");
      t.target_slot = t.slots.size();
    }
    t.slots.push_back(std::move(slot));
  }
  if (t.slots.empty()) throw std::invalid_argument("empty template");
  return t;
}

const std::vector<Template>& training_templates() {
  static const std::vector<Template> table = [] {
    const std::pair<const char*, const char*> rows[] = {
        {"simple", "the N0:a IV0 ."},
        {"simple", "the N0:a TV0 the N1:a ."},
        {"simple", "the N0:a BE0 ADJ ."},
        {"simple", "the N0:i IP0 ."},
        {"simple", "the N0:a IV0 like the N1 ."},
        {"simple", "the N0:a LVP0 ."},
        {"in-complement", "the N0:a CV the N1:a IV1 ."},
        {"in-complement", "the N0:a CV the N1:a TV1 the N2:a ."},
        {"in-complement", "the N0:a CV the N1:i IP1 ."},
        {"short-vp", "the N0:a IV0 and IV0 ."},
        {"long-vp", "the N0:a LVP0 and LVP0 ."},
        {"across-pp", "the N0:a P the N1 IV0 ."},
        {"across-pp", "the N0:i P the N1 IP0 ."},
        {"across-src", "the N0:a that TV0 the N1:a IV0 ."},
        {"across-src", "the N0:a that TV0 the N1:a LVP0 ."},
        {"across-orc", "the N0:a that the N1:a TV1 IV0 ."},
        {"across-orc", "the N0:i that the N1:a TV1 IP0 ."},
        {"across-orc-no-that", "the N0:a the N1:a TV1 IV0 ."},
        {"across-orc-no-that", "the N0:i the N1:a TV1 IP0 ."},
        {"reflexive", "the N0:a RV REFL0 ."},
        {"reflexive", "the N0:a CV the N1:a RV REFL1 ."},
        {"npi", "no N0:a HAVE0 ever been ADJ ."},
        {"npi", "most N0:a:pl HAVE0 been ADJ ."},
        {"npi", "the N0:a HAVE0 been ADJ ."},
    };
    std::vector<Template> out;
    for (const auto& [tag, pattern] : rows) out.push_back(parse_template(tag, pattern));
    return out;
  }();
  return table;
}

const std::vector<Template>& suite_templates() {
  static const std::vector<Template> table = [] {
    const std::pair<const char*, const char*> rows[] = {
        {"simple-agr", "the N0:a IV0* ."},
        {"sent-comp", "the N0:a CV the N1:a IV1* ."},
        {"short-vp-coord", "the N0:a IV0 and IV0* ."},
        {"long-vp-coord", "the N0:a LVP0 and LVP0* ."},
        {"across-pp", "the N0:a P the N1:a IV0* ."},
        {"across-pp", "the N0:i P the N1:a IP0* ."},
        {"across-src", "the N0:a that TV0 the N1:a IV0* ."},
        {"across-orc", "the N0:a that the N1:a TV1 IV0* ."},
        {"across-orc", "the N0:i that the N1:a TV1 IP0* ."},
        {"across-orc-no-that", "the N0:a the N1:a TV1 IV0* ."},
        {"across-orc-no-that", "the N0:i the N1:a TV1 IP0* ."},
        {"in-orc", "the N0:a that the N1:a TV1* IV0 ."},
        {"in-orc-no-that", "the N0:a the N1:a TV1* IV0 ."},
        {"refl-simple", "the N0:a RV REFL0* ."},
        {"refl-sent-comp", "the N0:a CV the N1:a RV REFL1* ."},
        {"refl-across-orc", "the N0:a that the N1:a TV1 RV REFL0* ."},
        {"npi-simple", "NPI* N0:a:pl HAVE0 ever been ADJ ."},
        {"npi-across-orc", "NPI* N0:a:pl that the N1:a TV1 HAVE0 ever been ADJ ."},
    };
    std::vector<Template> out;
    for (const auto& [tag, pattern] : rows) out.push_back(parse_template(tag, pattern));
    return out;
  }();
  return table;
}

std::vector<const Template*> templates_for(std::string_view construction) {
  std::vector<const Template*> out;
  for (const auto* table : {&training_templates(), &suite_templates()}) {
    for (const auto& t : *table) {
      if (t.construction == construction) out.push_back(&t);
    }
  }
  if (out.empty()) throw std::invalid_argument("unknown construction '" + std::string(construction) + "'");
  return out;
}

Realization realize(const Template& t, const Lexicon& lexicon, Usage noun_usage, Usage word_usage, Rng& rng) {
  Realization r;
  r.construction = t.construction;
  std::array<Number, kMaxNouns> numbers{};
  std::vector<const LexEntry*> used;

  // Draws an entry, avoiding ones already in the sentence when possible.
  auto pick = [&](const std::vector<const LexEntry*>& pool) -> const LexEntry* {
    if (pool.empty()) throw std::invalid_argument("lexicon has no entries for a template slot");
    const LexEntry* e = pool[rng.below(pool.size())];
    for (int tries = 0; tries < 8 && std::find(used.begin(), used.end(), e) != used.end(); ++tries) {
      e = pool[rng.below(pool.size())];
    }
    used.push_back(e);
    return e;
  };
  auto emit = [&](const std::vector<std::string>& words, std::string_view first_tag, std::string_view rest_tag) {
    for (std::size_t k = 0; k < words.size(); ++k) {
      r.tokens.push_back(words[k]);
      r.tags.emplace_back(k == 0 ? first_tag : rest_tag);
    }
  };

  for (std::size_t si = 0; si < t.slots.size(); ++si) {
    const Slot& s = t.slots[si];
    const std::size_t position = r.tokens.size();
    std::string alternative;
    switch (s.kind) {
      case SlotKind::kLiteral: emit({s.literal}, fixed_tag(s.literal), ""); break;
      case SlotKind::kNpi:
        emit({"no"}, "DT", "");
        alternative = "most";
        break;
      case SlotKind::kNoun: {
        const LexEntry* e = pick(lexicon.select(Category::kNoun, noun_usage, s.animacy));
        const Number n = s.plural_only || rng.bernoulli(0.5) ? Number::kPlural : Number::kSingular;
        numbers[static_cast<std::size_t>(s.index)] = n;
        emit(e->form(n), n == Number::kSingular ? "NN" : "NNS", "X");
        if (s.index == 0) r.head_animate = e->animate;
        break;
      }
      case SlotKind::kBe:
      case SlotKind::kHave: {
        const Number n = numbers[static_cast<std::size_t>(s.agree)];
        emit({std::string(number_form(s.kind, n))}, n == Number::kSingular ? "VBZ" : "VBP", "");
        alternative = number_form(s.kind, negex::flip(n));
        break;
      }
      case SlotKind::kReflexive: {
        const Number n = numbers[static_cast<std::size_t>(s.agree)];
        const bool male = rng.bernoulli(0.5);
        const std::string word = n == Number::kPlural ? "themselves" : (male ? "himself" : "herself");
        emit({word}, "PRP", "");
        alternative = n == Number::kPlural ? (male ? "himself" : "herself") : "themselves";
        break;
      }
      default: {
        const LexEntry* e = pick(lexicon.select(category_of(s.kind), word_usage));
        if (is_lexical_verb(s.kind)) {
          const Number n = numbers[static_cast<std::size_t>(s.agree)];
          emit(e->form(n), n == Number::kSingular ? "VBZ" : "VBP", "X");
          alternative = e->form(negex::flip(n)).front();
        } else {
          std::string_view tag = s.kind == SlotKind::kPrep ? "IN" : s.kind == SlotKind::kAdj ? "JJ" : "VBD";
          emit(e->singular, tag, "X");
        }
        break;
      }
    }
    if (s.target) {
      r.target_position = position;
      r.alternative = std::move(alternative);
    }
  }
  return r;
}

namespace {

class Matcher {
 public:
  Matcher(const Template& t, std::span<const std::string> tokens, const Lexicon& lexicon)
      : t_(t), tokens_(tokens), lexicon_(lexicon) {}

  bool run() { return match(0, 0); }

 private:
  bool words_at(const std::vector<std::string>& words, std::size_t pos) const {
    if (pos + words.size() > tokens_.size()) return false;
    return std::equal(words.begin(), words.end(), tokens_.begin() + static_cast<std::ptrdiff_t>(pos));
  }

  bool match(std::size_t si, std::size_t pos) {
    if (si == t_.slots.size()) return pos == tokens_.size();
    if (pos >= tokens_.size()) return false;
    const Slot& s = t_.slots[si];
    const std::string& tok = tokens_[pos];
    switch (s.kind) {
      case SlotKind::kLiteral: return tok == s.literal && match(si + 1, pos + 1);
      case SlotKind::kNpi: return tok == "no" && match(si + 1, pos + 1);
      case SlotKind::kBe:
      case SlotKind::kHave: {
        const Number n = numbers_[static_cast<std::size_t>(s.agree)];
        return tok == number_form(s.kind, n) && match(si + 1, pos + 1);
      }
      case SlotKind::kReflexive:
        return negex::is_reflexive(tok) && negex::reflexive_number(tok) == numbers_[static_cast<std::size_t>(s.agree)] &&
               match(si + 1, pos + 1);
      case SlotKind::kNoun: {
        for (const LexEntry* e : lexicon_.select(Category::kNoun, Usage::kTraining, s.animacy)) {
          for (Number n : {Number::kSingular, Number::kPlural}) {
            if (s.plural_only && n == Number::kSingular) continue;
            if (!words_at(e->form(n), pos)) continue;
            const Number saved = numbers_[static_cast<std::size_t>(s.index)];
            numbers_[static_cast<std::size_t>(s.index)] = n;
            if (match(si + 1, pos + e->form(n).size())) return true;
            numbers_[static_cast<std::size_t>(s.index)] = saved;
          }
        }
        return false;
      }
      default: {
        const bool agrees = is_lexical_verb(s.kind);
        for (const LexEntry* e : lexicon_.select(category_of(s.kind), Usage::kTraining)) {
          if (agrees) {
            const auto& words = e->form(numbers_[static_cast<std::size_t>(s.agree)]);
            if (words_at(words, pos) && match(si + 1, pos + words.size())) return true;
          } else if (words_at(e->singular, pos) && match(si + 1, pos + e->singular.size())) {
            return true;
          }
        }
        return false;
      }
    }
  }

  const Template& t_;
  std::span<const std::string> tokens_;
  const Lexicon& lexicon_;
  std::array<Number, kMaxNouns> numbers_{};
};

}  // namespace

bool is_grammatical(std::span<const std::string> tokens, std::string_view construction, const Lexicon& lexicon) {
  for (const Template* t : templates_for(construction)) {
    if (Matcher(*t, tokens, lexicon).run()) return true;
  }
  return false;
}

}  // namespace negexlm::corpus
