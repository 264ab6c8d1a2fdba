#include "negexlm/syneval.hpp"

#include <algorithm>
#include <cstdio>
#include <charconv>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <thread>

#include "negexlm/grammar.hpp"
#include "negexlm/text_io.hpp"

namespace negexlm::syneval {

namespace {

struct ConstructionInfo {
  std::string_view tag;
  std::string_view category;
  std::string_view display;
};

constexpr ConstructionInfo kConstructions[] = {
    {"simple-agr", "agreement", "Simple"},
    {"sent-comp", "agreement", "In a sent. complement"},
    {"short-vp-coord", "agreement", "Short VP coordination"},
    {"long-vp-coord", "agreement", "Long VP coordination"},
    {"across-pp", "agreement", "Across a PP"},
    {"across-src", "agreement", "Across a SRC"},
    {"across-orc", "agreement", "Across an ORC"},
    {"across-orc-no-that", "agreement", "Across an ORC (no that)"},
    {"in-orc", "agreement", "In an ORC"},
    {"in-orc-no-that", "agreement", "In an ORC (no that)"},
    {"refl-simple", "reflexive", "Simple"},
    {"refl-sent-comp", "reflexive", "In a sent. complement"},
    {"refl-across-orc", "reflexive", "Across an ORC"},
    {"npi-simple", "npi", "Simple"},
    {"npi-across-orc", "npi", "Across an ORC"},
};

const ConstructionInfo& info(std::string_view tag) {
  for (const auto& c : kConstructions) {
    if (c.tag == tag) return c;
  }
  throw std::invalid_argument("unknown suite construction '" + std::string(tag) + "'");
}

}  // namespace

const std::vector<std::string>& suite_constructions() {
  static const std::vector<std::string> tags = [] {
    std::vector<std::string> out;
    for (const auto& c : kConstructions) out.emplace_back(c.tag);
    return out;
  }();
  return tags;
}

bool is_suite_construction(std::string_view tag) {
  return std::any_of(std::begin(kConstructions), std::end(kConstructions),
                     [&](const ConstructionInfo& c) { return c.tag == tag; });
}

std::string_view category_of(std::string_view construction) { return info(construction).category; }

const std::vector<std::string>& categories() {
  static const std::vector<std::string> cats = {"agreement", "reflexive", "npi"};
  return cats;
}

std::string_view display_name(std::string_view construction) { return info(construction).display; }

std::vector<TestCase> generate_suite(const corpus::Lexicon& lexicon, std::span<const std::string> constructions,
                                     std::size_t n_per_construction, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<TestCase> out;
  for (const auto& tag : constructions) {
    info(tag);
    std::vector<const corpus::Template*> templates;
    for (const auto& t : corpus::suite_templates()) {
      if (t.construction == tag) templates.push_back(&t);
    }
    std::set<std::vector<std::string>> seen;
    std::size_t attempts = 0;
    std::size_t made = 0;
    while (made < n_per_construction) {
      const auto& t = *templates[rng.below(templates.size())];
      auto r = corpus::realize(t, lexicon, corpus::Usage::kSuite, corpus::Usage::kSuite, rng);
      ++attempts;
      if (!seen.insert(r.tokens).second && attempts < 50 * n_per_construction) continue;
      TestCase c;
      c.grammatical = r.tokens;
      c.ungrammatical = std::move(r.tokens);
      c.ungrammatical[r.target_position] = r.alternative;
      c.construction = tag;
      c.position = r.target_position;
      out.push_back(std::move(c));
      ++made;
    }
  }
  return out;
}

Outcome compare(double logp_grammatical, double logp_ungrammatical) {
  if (logp_grammatical > logp_ungrammatical) return Outcome::kCorrect;
  if (logp_grammatical == logp_ungrammatical) return Outcome::kTie;
  return Outcome::kIncorrect;
}

Outcome score_pair(model::LanguageModel& lm, const Vocabulary& vocab, const TestCase& c) {
  const TokenIds g = vocab.encode(c.grammatical);
  const TokenIds u = vocab.encode(c.ungrammatical);
  return compare(model::sentence_logprob(lm, g), model::sentence_logprob(lm, u));
}

std::vector<Outcome> score_suite(model::LanguageModel& lm, const Vocabulary& vocab, std::span<const TestCase> suite,
                                 std::size_t threads) {
  std::vector<TokenIds> sentences;
  sentences.reserve(2 * suite.size());
  for (const auto& c : suite) {
    sentences.push_back(vocab.encode(c.grammatical));
    sentences.push_back(vocab.encode(c.ungrammatical));
  }
  std::vector<double> scores(sentences.size());
  threads = std::max<std::size_t>(1, std::min(threads, suite.size()));
  // Shards are contiguous pair ranges; each worker builds its own graphs and
  // only reads the parameters.
  std::vector<std::thread> workers;
  const std::size_t per = (suite.size() + threads - 1) / std::max<std::size_t>(threads, 1);
  auto work = [&](std::size_t begin, std::size_t end) {
    auto part = model::sentence_logprobs(
        lm, std::span<const TokenIds>(sentences.data() + 2 * begin, 2 * (end - begin)));
    std::copy(part.begin(), part.end(), scores.begin() + static_cast<std::ptrdiff_t>(2 * begin));
  };
  for (std::size_t begin = per; begin < suite.size(); begin += per) {
    workers.emplace_back(work, begin, std::min(suite.size(), begin + per));
  }
  if (!suite.empty()) work(0, std::min(suite.size(), per));
  for (auto& w : workers) w.join();

  std::vector<Outcome> out(suite.size());
  for (std::size_t i = 0; i < suite.size(); ++i) out[i] = compare(scores[2 * i], scores[2 * i + 1]);
  return out;
}

SuiteReport summarize(std::span<const TestCase> suite, std::span<const Outcome> outcomes) {
  if (suite.size() != outcomes.size()) throw std::invalid_argument("summarize: one outcome per case required");
  SuiteReport report;
  for (const auto& tag : suite_constructions()) {
    ConstructionResult r;
    r.construction = tag;
    for (std::size_t i = 0; i < suite.size(); ++i) {
      if (suite[i].construction != tag) continue;
      ++r.n;
      if (outcomes[i] == Outcome::kCorrect) ++r.correct;
      if (outcomes[i] == Outcome::kTie) ++r.ties;
    }
    if (r.n > 0) report.rows.push_back(std::move(r));
  }
  return report;
}

SuiteReport evaluate(model::LanguageModel& lm, const Vocabulary& vocab, std::span<const TestCase> suite,
                     std::size_t threads) {
  if (suite.empty()) throw std::invalid_argument("evaluate: empty suite");
  const auto outcomes = score_suite(lm, vocab, suite, threads);
  SuiteReport report = summarize(suite, outcomes);
  for (const auto& c : suite) {
    for (const auto* s : {&c.grammatical, &c.ungrammatical}) {
      for (const auto& tok : *s) report.unk_tokens += vocab.contains(tok) ? 0 : 1;
    }
  }
  return report;
}

const ConstructionResult* SuiteReport::find(std::string_view construction) const {
  for (const auto& r : rows) {
    if (r.construction == construction) return &r;
  }
  return nullptr;
}

double SuiteReport::accuracy(std::string_view construction) const {
  const auto* r = find(construction);
  if (r == nullptr) throw std::invalid_argument("construction '" + std::string(construction) + "' not evaluated");
  return r->accuracy();
}

double SuiteReport::macro_average(std::string_view category) const {
  double sum = 0.0;
  std::size_t k = 0;
  for (const auto& r : rows) {
    if (category_of(r.construction) != category) continue;
    sum += r.accuracy();
    ++k;
  }
  return k == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / static_cast<double>(k);
}

std::vector<TestCase> animate_subset(std::span<const TestCase> suite, const corpus::Lexicon& lexicon) {
  std::vector<TestCase> out;
  for (const auto& c : suite) {
    for (const auto& tok : c.grammatical) {
      if (const auto* e = lexicon.find_noun(tok)) {
        if (e->animate) out.push_back(c);
        break;
      }
    }
  }
  return out;
}

VerbBreakdown long_vp_breakdown(std::span<const TestCase> suite, std::span<const Outcome> outcomes) {
  if (suite.size() != outcomes.size()) throw std::invalid_argument("long_vp_breakdown: one outcome per case required");
  VerbBreakdown b;
  auto add = [](ConstructionResult& r, Outcome o) {
    ++r.n;
    if (o == Outcome::kCorrect) ++r.correct;
    if (o == Outcome::kTie) ++r.ties;
  };
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const auto& c = suite[i];
    if (c.construction != "long-vp-coord") continue;
    add(b.all, outcomes[i]);
    const std::string& target = c.grammatical[c.position];
    if (target == "like" || target == "likes") {
      add(b.target_like, outcomes[i]);
      continue;
    }
    add(b.target_other, outcomes[i]);
    // Tokens: the N V1 ...; the first verb follows the head noun.
    const std::string& first = c.grammatical.size() > 2 ? c.grammatical[2] : target;
    add(first == "likes" || first == "like" ? b.first_like : b.first_other, outcomes[i]);
  }
  b.all.construction = "all";
  b.target_like.construction = "like";
  b.target_other.construction = "other";
  b.first_like.construction = "first-likes";
  b.first_other.construction = "first-other";
  return b;
}

std::string serialize_suite(std::span<const TestCase> suite) {
  std::string out;
  for (const auto& c : suite) {
    out += join(c.grammatical, " ");
    out += '\t';
    out += join(c.ungrammatical, " ");
    out += '\t';
    out += c.construction;
    out += '\t';
    out += std::to_string(c.position);
    out += '\n';
  }
  return out;
}

std::vector<TestCase> parse_suite(std::string_view text) {
  std::vector<TestCase> out;
  std::size_t line_no = 0;
  for (std::string_view line : split_lines(text)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = "suite line " + std::to_string(line_no) + ": ";
    auto f = split(line, '\t');
    if (f.size() != 4) throw std::invalid_argument(where + "expected 4 tab-separated fields");
    TestCase c;
    c.grammatical = split_whitespace(f[0]);
    c.ungrammatical = split_whitespace(f[1]);
    c.construction = f[2];
    if (!is_suite_construction(c.construction)) throw std::invalid_argument(where + "unknown construction");
    auto [p, ec] = std::from_chars(f[3].data(), f[3].data() + f[3].size(), c.position);
    if (ec != std::errc() || p != f[3].data() + f[3].size()) throw std::invalid_argument(where + "bad position");
    if (c.grammatical.size() != c.ungrammatical.size() || c.position >= c.grammatical.size()) {
      throw std::invalid_argument(where + "pair is not aligned");
    }
    std::size_t diffs = 0;
    for (std::size_t i = 0; i < c.grammatical.size(); ++i) diffs += c.grammatical[i] != c.ungrammatical[i];
    if (diffs != 1 || c.grammatical[c.position] == c.ungrammatical[c.position]) {
      throw std::invalid_argument(where + "pair must differ exactly at the given position");
    }
    out.push_back(std::move(c));
  }
  return out;
}

void save_suite(const std::filesystem::path& path, std::span<const TestCase> suite) {
  write_file(path, serialize_suite(suite));
}

std::vector<TestCase> load_suite(const std::filesystem::path& path) { return parse_suite(read_file(path)); }

std::string report_csv(const SuiteReport& report) {
  std::string out = "construction,n,correct,ties,accuracy\n";
  char buf[64];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%.6f", r.accuracy());
    out += r.construction + "," + std::to_string(r.n) + "," + std::to_string(r.correct) + "," +
           std::to_string(r.ties) + "," + buf + "\n";
  }
  return out;
}

SuiteReport parse_report_csv(std::string_view text) {
  SuiteReport report;
  bool header = false;
  for (std::string_view line : split_lines(text)) {
    if (line.empty() || line.front() == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    auto f = split(line, ',');
    if (f.size() != 5) throw std::invalid_argument("report row needs 5 columns");
    ConstructionResult r;
    r.construction = f[0];
    r.n = std::stoul(f[1]);
    r.correct = std::stoul(f[2]);
    r.ties = std::stoul(f[3]);
    report.rows.push_back(std::move(r));
  }
  return report;
}

}  // namespace negexlm::syneval
