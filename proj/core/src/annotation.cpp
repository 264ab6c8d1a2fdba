#include "negexlm/annotation.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>

#include "negexlm/text_io.hpp"

namespace negexlm::negex {

std::string_view target_kind_name(TargetKind k) {
  return k == TargetKind::kPresentVerb ? "present-verb" : "reflexive";
}

TargetKind parse_target_kind(std::string_view s) {
  if (s == "present-verb") return TargetKind::kPresentVerb;
  if (s == "reflexive") return TargetKind::kReflexive;
  throw std::invalid_argument("unknown target kind '" + std::string(s) + "'");
}

const std::vector<std::string>& construction_tags() {
  static const std::vector<std::string> tags = {
      "none",   "simple",     "in-complement", "short-vp",  "long-vp",
      "across-pp", "across-src", "across-orc", "across-orc-no-that", "reflexive", "npi"};
  return tags;
}

bool is_construction_tag(std::string_view tag) {
  const auto& tags = construction_tags();
  return std::find(tags.begin(), tags.end(), tag) != tags.end();
}

AnnotatedSentence annotate_targets(std::vector<std::string> tokens, std::span<const std::string> tags,
                                   const Inflector& inflector, std::string construction, std::size_t* skipped) {
  if (tags.size() != tokens.size()) throw std::invalid_argument("annotate_targets: tags not aligned to tokens");
  AnnotatedSentence out;
  out.construction = std::move(construction);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& tok = tokens[i];
    if (tags[i] == "VBZ" || tags[i] == "VBP") {
      const Number n = tags[i] == "VBZ" ? Number::kSingular : Number::kPlural;
      try {
        std::string neg = inflector.flip_verb_number(tok, n);
        out.targets.push_back({i, TargetKind::kPresentVerb, n, inflector.lemma(tok, n), {std::move(neg)}});
      } catch (const std::invalid_argument&) {
        if (skipped != nullptr) ++*skipped;
      }
    } else if (tags[i] == "PRP" && is_reflexive(tok)) {
      out.targets.push_back({i, TargetKind::kReflexive, reflexive_number(tok), tok, flip_reflexive(tok)});
    }
  }
  out.tokens = std::move(tokens);
  return out;
}

std::vector<std::vector<std::string>> negative_sentences(const AnnotatedSentence& s) {
  std::vector<std::vector<std::string>> out;
  for (const auto& t : s.targets) {
    for (const auto& neg : t.negatives) {
      out.push_back(s.tokens);
      out.back()[t.position] = neg;
    }
  }
  return out;
}

Corpus filter_targets_by_lemma(const Corpus& corpus, const std::set<std::string>& excluded_lemmas,
                               const Inflector& inflector) {
  std::set<std::string> excluded;
  for (const auto& w : excluded_lemmas) {
    excluded.insert(w);
    excluded.insert(inflector.normalize_lemma(w));
  }
  Corpus out = corpus;
  for (auto& s : out) {
    std::erase_if(s.targets, [&](const TargetAnnotation& t) { return excluded.contains(t.lemma); });
  }
  return out;
}

Corpus filter_targets_by_construction(const Corpus& corpus, std::string_view excluded_tag) {
  if (!is_construction_tag(excluded_tag)) {
    throw std::invalid_argument("unknown construction tag '" + std::string(excluded_tag) + "'");
  }
  Corpus out = corpus;
  for (auto& s : out) {
    if (s.construction == excluded_tag) s.targets.clear();
  }
  return out;
}

std::size_t count_targets(const Corpus& corpus) {
  std::size_t n = 0;
  for (const auto& s : corpus) n += s.targets.size();
  return n;
}

std::string format_sentence(const AnnotatedSentence& s) {
  std::string line = join(s.tokens, " ");
  line += '\t';
  line += s.construction;
  line += '\t';
  for (std::size_t k = 0; k < s.targets.size(); ++k) {
    const auto& t = s.targets[k];
    if (k) line += ';';
    line += std::to_string(t.position);
    line += ',';
    line += target_kind_name(t.kind);
    line += ',';
    line += number_name(t.number);
    line += ',';
    line += t.lemma;
    line += ',';
    line += join(t.negatives, "|");
  }
  return line;
}

namespace {

std::size_t parse_index(std::string_view s) {
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw std::invalid_argument("bad target position '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

AnnotatedSentence parse_sentence(std::string_view line) {
  auto fields = split(line, '\t');
  if (fields.size() != 3) throw std::invalid_argument("corpus line needs 3 tab-separated fields");
  AnnotatedSentence s;
  s.tokens = split_whitespace(fields[0]);
  s.construction = fields[1];
  if (!is_construction_tag(s.construction)) {
    throw std::invalid_argument("unknown construction tag '" + s.construction + "'");
  }
  if (!fields[2].empty()) {
    for (const auto& rec : split(fields[2], ';')) {
      auto parts = split(rec, ',');
      if (parts.size() != 5) throw std::invalid_argument("bad target record '" + rec + "'");
      TargetAnnotation t;
      t.position = parse_index(parts[0]);
      t.kind = parse_target_kind(parts[1]);
      t.number = parse_number(parts[2]);
      t.lemma = parts[3];
      t.negatives = split(parts[4], '|');
      if (t.position >= s.tokens.size()) throw std::invalid_argument("target position out of range");
      if (!s.targets.empty() && t.position <= s.targets.back().position) {
        throw std::invalid_argument("target positions must be strictly increasing");
      }
      for (const auto& n : t.negatives) {
        if (n.empty() || n == s.tokens[t.position]) throw std::invalid_argument("bad negative token in '" + rec + "'");
      }
      s.targets.push_back(std::move(t));
    }
  }
  return s;
}

std::string serialize_corpus(const Corpus& corpus) {
  std::string out;
  for (const auto& s : corpus) {
    out += format_sentence(s);
    out += '\n';
  }
  return out;
}

Corpus parse_corpus(std::string_view text) {
  Corpus corpus;
  std::size_t line_no = 0;
  for (std::string_view line : split_lines(text)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      corpus.push_back(parse_sentence(line));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("corpus line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return corpus;
}

void save_corpus(const std::filesystem::path& path, const Corpus& corpus) { write_file(path, serialize_corpus(corpus)); }

Corpus load_corpus(const std::filesystem::path& path) { return parse_corpus(read_file(path)); }

}  // namespace negexlm::negex
