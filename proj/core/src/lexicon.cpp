#include "negexlm/lexicon.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "negexlm/embedded_data.hpp"
#include "negexlm/text_io.hpp"

namespace negexlm::corpus {

namespace {

struct CategoryName {
  Category category;
  std::string_view name;
};

constexpr CategoryName kCategories[] = {
    {Category::kNoun, "noun"},       {Category::kIntransitive, "iverb"},  {Category::kTransitive, "tverb"},
    {Category::kLongVp, "lvp"},      {Category::kInanimatePred, "ipred"}, {Category::kPrep, "prep"},
    {Category::kAdj, "adj"},         {Category::kCompVerb, "cverb"},      {Category::kReflVerb, "rverb"},
};

bool pool_allowed(Pool pool, Usage usage) {
  switch (usage) {
    case Usage::kSuite: return pool != Pool::kTrain;
    case Usage::kTraining: return true;
    case Usage::kTrainingOnly: return pool != Pool::kSuite;
  }
  return false;
}

}  // namespace

std::string_view category_name(Category c) {
  for (const auto& e : kCategories) {
    if (e.category == c) return e.name;
  }
  return "noun";
}

Category parse_category(std::string_view s) {
  for (const auto& e : kCategories) {
    if (e.name == s) return e.category;
  }
  throw std::invalid_argument("unknown lexicon category '" + std::string(s) + "'");
}

Lexicon Lexicon::parse(std::string_view text) {
  Lexicon lex;
  std::size_t line_no = 0;
  for (std::string_view raw : split_lines(text)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split(line, '\t');
    const std::string where = "lexicon line " + std::to_string(line_no) + ": ";
    if (fields.size() != 5) throw std::invalid_argument(where + "expected 5 tab-separated fields");
    LexEntry e;
    e.category = parse_category(fields[0]);
    e.singular = split_whitespace(fields[1]);
    e.plural = split_whitespace(fields[2]);
    if (e.singular.empty() || e.plural.empty()) throw std::invalid_argument(where + "empty form");
    if (e.singular.size() != e.plural.size()) throw std::invalid_argument(where + "forms differ in length");
    if (fields[3] == "animate") {
      e.animate = true;
    } else if (fields[3] != "inanimate" && fields[3] != "-") {
      throw std::invalid_argument(where + "bad animacy '" + fields[3] + "'");
    }
    if (fields[4] == "suite") {
      e.pool = Pool::kSuite;
    } else if (fields[4] == "train") {
      e.pool = Pool::kTrain;
    } else if (fields[4] == "both") {
      e.pool = Pool::kBoth;
    } else {
      throw std::invalid_argument(where + "bad pool '" + fields[4] + "'");
    }
    lex.entries_.push_back(std::move(e));
  }
  return lex;
}

Lexicon Lexicon::load(const std::filesystem::path& path) { return parse(read_file(path)); }

const Lexicon& Lexicon::builtin() {
  static const Lexicon lex = parse(data::builtin_lexicon());
  return lex;
}

std::vector<const LexEntry*> Lexicon::select(Category c, Usage usage, int animacy) const {
  std::vector<const LexEntry*> out;
  for (const auto& e : entries_) {
    if (e.category != c || !pool_allowed(e.pool, usage)) continue;
    if (animacy >= 0 && e.animate != (animacy == 1)) continue;
    out.push_back(&e);
  }
  return out;
}

const LexEntry* Lexicon::find_noun(std::string_view word) const {
  for (const auto& e : entries_) {
    if (e.category != Category::kNoun) continue;
    if (e.singular.front() == word || e.plural.front() == word) return &e;
  }
  return nullptr;
}

std::vector<std::string> Lexicon::words() const {
  std::set<std::string> seen;
  for (const auto& e : entries_) {
    seen.insert(e.singular.begin(), e.singular.end());
    seen.insert(e.plural.begin(), e.plural.end());
  }
  return {seen.begin(), seen.end()};
}

std::vector<std::string> tag_tokens(std::span<const std::string> tokens, const Lexicon& lexicon) {
  std::set<std::string> nouns_sg, nouns_pl, verbs_sg, verbs_pl;
  for (const auto& e : lexicon.entries()) {
    if (e.category == Category::kNoun) {
      nouns_sg.insert(e.singular.front());
      nouns_pl.insert(e.plural.front());
    } else if (e.inflects()) {
      verbs_sg.insert(e.singular.front());
      verbs_pl.insert(e.plural.front());
    }
  }
  for (auto [sg, pl] : {std::pair{"is", "are"}, {"has", "have"}, {"does", "do"}, {"goes", "go"}}) {
    verbs_sg.insert(sg);
    verbs_pl.insert(pl);
  }
  std::vector<std::string> tags(tokens.size(), "X");
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& w = tokens[i];
    const std::string prev_tag = i > 0 ? tags[i - 1] : "";
    const bool verb_context =
        prev_tag == "NN" || prev_tag == "NNS" || (i > 0 && (tokens[i - 1] == "that" || tokens[i - 1] == "and"));
    if (negex::is_reflexive(w)) {
      tags[i] = "PRP";
    } else if (verb_context && verbs_sg.contains(w)) {
      tags[i] = "VBZ";
    } else if (verb_context && verbs_pl.contains(w)) {
      tags[i] = "VBP";
    } else if (nouns_sg.contains(w)) {
      tags[i] = "NN";
    } else if (nouns_pl.contains(w)) {
      tags[i] = "NNS";
    } else if (w == "the" || w == "a" || w == "no" || w == "most" || w == "some") {
      tags[i] = "DT";
    }
  }
  return tags;
}

}  // namespace negexlm::corpus
