#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "negexlm/grammar.hpp"
#include "negexlm/syneval.hpp"
#include "negexlm/text_io.hpp"

using namespace negexlm;
using syneval::Outcome;
using syneval::TestCase;

namespace {

TestCase pair(const std::string& good, const std::string& bad, std::string tag) {
  TestCase c{split_whitespace(good), split_whitespace(bad), std::move(tag), 0};
  while (c.grammatical[c.position] == c.ungrammatical[c.position]) ++c.position;
  return c;
}

const Vocabulary& small_vocab() {
  static const Vocabulary v = [] {
    std::vector<std::string> toks = {"the", "author", "authors", "laughs", "laugh", "senators", "smile", "smiles",
                                     "that", "guards", "like", ".", "no", "most", "have", "ever", "been", "popular"};
    return Vocabulary::from_tokens(toks);
  }();
  return v;
}

model::LanguageModel random_model(std::uint64_t seed) {
  model::LmConfig c;
  c.num_layers = 2;
  c.embed_dim = 6;
  c.hidden_dim = 7;
  c.vocab_size = small_vocab().size();
  model::LanguageModel lm(c);
  Rng rng(seed);
  lm.initialize(rng, 0.8);
  return lm;
}

// Per-token product computed from the n+1 next-token distributions.
double brute_logprob(model::LanguageModel& lm, const TokenIds& ids) {
  const auto dists = model::forward(lm, ids);
  double p = 1.0;
  for (std::size_t t = 0; t <= ids.size(); ++t) {
    const TokenId next = t < ids.size() ? ids[t] : Vocabulary::kEos;
    p *= std::exp(dists[t][next]);
  }
  return std::log(p);
}

}  // namespace

TEST_CASE("suite generation") {
  const auto& lex = corpus::Lexicon::builtin();
  const auto& tags = syneval::suite_constructions();
  CHECK(tags.size() == 15);
  const auto suite = syneval::generate_suite(lex, tags, 30, 7);
  CHECK(suite.size() == 15 * 30);
  for (const auto& c : suite) {
    CAPTURE(join(c.grammatical, " "));
    REQUIRE(c.grammatical.size() == c.ungrammatical.size());
    std::size_t diff = 0;
    for (std::size_t i = 0; i < c.grammatical.size(); ++i) diff += c.grammatical[i] != c.ungrammatical[i];
    CHECK(diff == 1);
    CHECK(c.grammatical[c.position] != c.ungrammatical[c.position]);
    CHECK(corpus::is_grammatical(c.grammatical, c.construction, lex));
    CHECK_FALSE(corpus::is_grammatical(c.ungrammatical, c.construction, lex));
  }
  CHECK(syneval::generate_suite(lex, tags, 30, 7) == suite);
  const std::vector<std::string> bogus = {"bogus"};
  CHECK_THROWS_AS(syneval::generate_suite(lex, bogus, 1, 1), std::invalid_argument);
}

TEST_CASE("documented pairs are recognised by their templates") {
  const auto& lex = corpus::Lexicon::builtin();
  const auto orc = pair("the author that the guards like laughs .", "the author that the guards like laugh .",
                        "across-orc");
  CHECK(corpus::is_grammatical(orc.grammatical, "across-orc", lex));
  CHECK_FALSE(corpus::is_grammatical(orc.ungrammatical, "across-orc", lex));
  const auto simple = pair("the senators smile .", "the senators smiles .", "simple-agr");
  CHECK(corpus::is_grammatical(simple.grammatical, "simple-agr", lex));
  CHECK_FALSE(corpus::is_grammatical(simple.ungrammatical, "simple-agr", lex));
  const auto npi = pair("no authors have ever been popular .", "most authors have ever been popular .", "npi-simple");
  CHECK(corpus::is_grammatical(npi.grammatical, "npi-simple", lex));
  CHECK_FALSE(corpus::is_grammatical(npi.ungrammatical, "npi-simple", lex));
}

TEST_CASE("scoring") {
  CHECK(syneval::compare(-1.0, -2.0) == Outcome::kCorrect);
  CHECK(syneval::compare(-2.0, -1.0) == Outcome::kIncorrect);
  CHECK(syneval::compare(-1.0, -1.0) == Outcome::kTie);

  model::LmConfig zc;
  zc.num_layers = 1;
  zc.embed_dim = 2;
  zc.hidden_dim = 2;
  zc.vocab_size = small_vocab().size();
  model::LanguageModel uniform(zc);
  const auto simple = pair("the senators smile .", "the senators smiles .", "simple-agr");
  CHECK(syneval::score_pair(uniform, small_vocab(), simple) == Outcome::kTie);

  const std::vector<TestCase> suite = {
      simple,
      pair("the author that the guards like laughs .", "the author that the guards like laugh .", "across-orc"),
      pair("no authors have ever been popular .", "most authors have ever been popular .", "npi-simple"),
      pair("the authors laugh .", "the authors laughs .", "simple-agr"),
  };
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto lm = random_model(seed);
    for (const auto& c : suite) {
      const double g = brute_logprob(lm, small_vocab().encode(c.grammatical));
      const double u = brute_logprob(lm, small_vocab().encode(c.ungrammatical));
      CHECK(std::abs(g - model::sentence_logprob(lm, small_vocab().encode(c.grammatical))) < 1e-9);
      REQUIRE(g != u);
      CHECK(syneval::score_pair(lm, small_vocab(), c) == (g > u ? Outcome::kCorrect : Outcome::kIncorrect));
    }
    const auto outcomes = syneval::score_suite(lm, small_vocab(), suite);
    auto reversed = suite;
    std::reverse(reversed.begin(), reversed.end());
    auto back = syneval::score_suite(lm, small_vocab(), reversed);
    std::reverse(back.begin(), back.end());
    CHECK(back == outcomes);
    CHECK(syneval::score_suite(lm, small_vocab(), suite, 3) == outcomes);
  }
}

TEST_CASE("summaries") {
  std::vector<TestCase> suite;
  std::vector<Outcome> outcomes;
  auto add = [&](const std::string& tag, Outcome o) {
    suite.push_back(pair("the authors laugh .", "the authors laughs .", tag));
    outcomes.push_back(o);
  };
  for (int i = 0; i < 3; ++i) add("simple-agr", Outcome::kCorrect);
  add("simple-agr", Outcome::kTie);
  add("across-pp", Outcome::kCorrect);
  add("across-pp", Outcome::kIncorrect);
  add("npi-simple", Outcome::kCorrect);
  const auto r = syneval::summarize(suite, outcomes);
  CHECK(r.accuracy("simple-agr") == doctest::Approx(0.75));
  CHECK(r.find("simple-agr")->ties == 1);
  CHECK(r.accuracy("across-pp") == doctest::Approx(0.5));
  CHECK(r.macro_average("agreement") == doctest::Approx((0.75 + 0.5) / 2));
  CHECK(r.macro_average("npi") == doctest::Approx(1.0));
  CHECK(std::isnan(r.macro_average("reflexive")));
  CHECK_THROWS(r.accuracy("long-vp-coord"));

  const auto csv = syneval::report_csv(r);
  const auto parsed = syneval::parse_report_csv(csv);
  CHECK(syneval::report_csv(parsed) == csv);
  CHECK(parsed.accuracy("simple-agr") == r.accuracy("simple-agr"));
}

TEST_CASE("suite file round-trip") {
  const auto suite = syneval::generate_suite(corpus::Lexicon::builtin(), syneval::suite_constructions(), 5, 3);
  const auto text = syneval::serialize_suite(suite);
  CHECK(syneval::parse_suite(text) == suite);
}

TEST_CASE("categories") {
  CHECK(syneval::category_of("across-orc") == "agreement");
  CHECK(syneval::category_of("refl-across-orc") == "reflexive");
  CHECK(syneval::category_of("npi-across-orc") == "npi");
  std::size_t total = 0;
  for (const auto& cat : syneval::categories()) {
    for (const auto& c : syneval::suite_constructions()) total += syneval::category_of(c) == cat;
  }
  CHECK(total == syneval::suite_constructions().size());
}
