#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "negexlm/annotation.hpp"
#include "negexlm/corpus.hpp"
#include "negexlm/text_io.hpp"

using namespace negexlm;
using negex::AnnotatedSentence;
using negex::Corpus;
using negex::Number;

namespace {

AnnotatedSentence tagged(const std::string& text, const std::vector<std::string>& tags, std::string construction) {
  static const negex::Inflector inf;
  return negex::annotate_targets(split_whitespace(text), tags, inf, std::move(construction));
}

Corpus sample_corpus() {
  return {
      tagged("the author laughs .", {"DT", "NN", "VBZ", "."}, "simple"),
      tagged("the author near the guards likes the dogs .", {"DT", "NN", "IN", "DT", "NNS", "VBZ", "DT", "NNS", "."},
             "across-pp"),
      tagged("the authors that the guard likes swim .", {"DT", "NNS", "WDT", "DT", "NN", "VBZ", "VBP", "."},
             "across-orc"),
      tagged("the senators hurt themselves .", {"DT", "NNS", "VBD", "PRP", "."}, "reflexive"),
  };
}

}  // namespace

TEST_CASE("annotate_targets") {
  const auto s = tagged("the author laughs .", {"DT", "NN", "VBZ", "."}, "simple");
  REQUIRE(s.targets.size() == 1);
  CHECK(s.targets[0].position == 2);
  CHECK(s.targets[0].number == Number::kSingular);
  CHECK(s.targets[0].lemma == "laugh");
  CHECK(s.targets[0].negatives == std::vector<std::string>{"laugh"});

  CHECK(tagged("the author was happy .", {"DT", "NN", "VBD", "JJ", "."}, "none").targets.empty());

  const auto two = tagged("she leaves there but comes back", {"PRP", "VBZ", "RB", "CC", "VBZ", "RB"}, "none");
  CHECK(two.targets.size() == 2);

  const auto refl = tagged("the senators hurt themselves .", {"DT", "NNS", "VBD", "PRP", "."}, "reflexive");
  REQUIRE(refl.targets.size() == 1);
  CHECK(refl.targets[0].kind == negex::TargetKind::kReflexive);
  CHECK(refl.targets[0].negatives == std::vector<std::string>{"himself", "herself"});

  std::size_t skipped = 0;
  const negex::Inflector inf;
  const std::vector<std::string> tags = {"DT", "NN", "VBZ"};
  const auto bad = negex::annotate_targets({"the", "author", "was"}, tags, inf, "none", &skipped);
  CHECK(bad.targets.empty());
  CHECK(skipped == 1);
}

TEST_CASE("negative_sentences") {
  const auto one = tagged("the author laughs .", {"DT", "NN", "VBZ", "."}, "simple");
  const auto negs = negex::negative_sentences(one);
  REQUIRE(negs.size() == 1);
  CHECK(join(negs[0], " ") == "the author laugh .");

  const auto three = tagged("the author near the senators hurt themselves and laughs",
                            {"DT", "NN", "IN", "DT", "NNS", "VBD", "PRP", "CC", "VBZ"}, "none");
  REQUIRE(three.targets.size() == 2);
  const auto n3 = negex::negative_sentences(three);
  CHECK(n3.size() == 3);
  std::set<std::vector<std::string>> distinct(n3.begin(), n3.end());
  CHECK(distinct.size() == 3);
  CHECK(distinct.count(three.tokens) == 0);

  CHECK(negex::negative_sentences(tagged("the end .", {"DT", "NN", "."}, "none")).empty());
}

TEST_CASE("lemma filter") {
  const negex::Inflector inf;
  const auto corpus = sample_corpus();
  const auto no_laugh = negex::filter_targets_by_lemma(corpus, {"laugh"}, inf);
  CHECK(no_laugh[0].targets.empty());
  CHECK(no_laugh[1].targets.size() == 1);
  CHECK(negex::filter_targets_by_lemma(corpus, {}, inf) == corpus);

  const auto be = tagged("the author is here .", {"DT", "NN", "VBZ", "RB", "."}, "none");
  CHECK(negex::filter_targets_by_lemma(Corpus{be}, {"is"}, inf)[0].targets.empty());

  const std::set<std::string> all = {"swim", "smile", "laugh", "enjoy", "hate", "bring", "interest",
                                     "like", "write", "admire", "love", "know", "is"};
  const auto none_left = negex::filter_targets_by_lemma(corpus, all, inf);
  for (const auto& s : none_left) {
    for (const auto& t : s.targets) CHECK(t.kind == negex::TargetKind::kReflexive);
  }
}

TEST_CASE("construction filter") {
  const negex::Inflector inf;
  const auto corpus = sample_corpus();
  const auto no_orc = negex::filter_targets_by_construction(corpus, "across-orc");
  CHECK(no_orc[2].targets.empty());
  CHECK(negex::count_targets(no_orc) == negex::count_targets(corpus) - corpus[2].targets.size());
  CHECK(negex::filter_targets_by_construction(corpus, "npi") == corpus);
  CHECK_THROWS_AS(negex::filter_targets_by_construction(corpus, "bogus"), std::invalid_argument);

  const auto no_pp = negex::filter_targets_by_construction(corpus, "across-pp");
  CHECK(negex::count_targets(no_pp) == negex::count_targets(corpus) - corpus[1].targets.size());

  // Idempotent and commuting.
  CHECK(negex::filter_targets_by_construction(no_pp, "across-pp") == no_pp);
  const auto a = negex::filter_targets_by_lemma(no_pp, {"swim"}, inf);
  const auto b = negex::filter_targets_by_construction(negex::filter_targets_by_lemma(corpus, {"swim"}, inf), "across-pp");
  CHECK(a == b);
}

TEST_CASE("annotated corpus round-trip") {
  const auto corpus = sample_corpus();
  const auto text = negex::serialize_corpus(corpus);
  CHECK(negex::parse_corpus(text) == corpus);
  CHECK(negex::serialize_corpus(negex::parse_corpus(text)) == text);
  CHECK(negex::format_sentence(corpus[0]) == "the author laughs .\tsimple\t2,present-verb,singular,laugh,laugh");
  CHECK_THROWS(negex::parse_sentence("only one field"));
}
