#include <cmath>

#include "doctest.h"
#include "gradcheck.hpp"
#include "negexlm/losses.hpp"

using namespace negexlm;
using loss::EncodedSentence;
using loss::LossConfig;
using loss::LossKind;

namespace {

model::LanguageModel tiny_model(std::uint64_t seed, double range = 0.5) {
  model::LmConfig c;
  c.num_layers = 1;
  c.embed_dim = 4;
  c.hidden_dim = 8;
  c.vocab_size = 12;
  c.dropout_embed = 0.0;
  c.dropout_hidden = 0.0;
  model::LanguageModel lm(c);
  Rng rng(seed);
  lm.initialize(rng, range);
  return lm;
}

std::vector<EncodedSentence> tiny_corpus() {
  std::vector<EncodedSentence> out(3);
  out[0].tokens = {3, 4, 5};
  out[0].targets = {{1, 4, {6}, negex::Number::kSingular}};
  out[1].tokens = {3, 7, 8, 9, 10};
  out[1].targets = {{1, 7, {11}, negex::Number::kPlural}, {3, 9, {4, 5}, negex::Number::kSingular}};
  out[2].tokens = {11, 6};
  return out;
}

}  // namespace

TEST_CASE("scalar loss terms") {
  CHECK(loss::unlikelihood_term(std::log(0.5), 1.0) == doctest::Approx(0.693147).epsilon(1e-6));
  CHECK(loss::unlikelihood_term(-1e9, 1.0) == doctest::Approx(0.0));
  CHECK(loss::unlikelihood_term(std::log(0.5), 1000.0) == doctest::Approx(693.147).epsilon(1e-6));
  CHECK(std::isfinite(loss::unlikelihood_term(0.0, 1.0)));
  CHECK(loss::token_margin_term(-2.0, -5.0, 10.0) == doctest::Approx(7.0));
  CHECK(loss::token_margin_term(0.0, -12.0, 10.0) == 0.0);
  CHECK(loss::token_margin_term(-3.0, -3.0, 0.0) == 0.0);
  CHECK(loss::sentence_margin_term(-40.0, -45.0, 10.0) == doctest::Approx(5.0));
  CHECK(loss::sentence_margin_term(-40.0, -60.0, 10.0) == 0.0);
  CHECK(loss::sentence_margin_term(-40.0, -40.0, 0.0) == 0.0);

  LossConfig c;
  c.kind = LossKind::kBinary;
  CHECK(loss::total_loss(5.0, 2.0, c) == doctest::Approx(7.0));
  c.beta = 0.0;
  CHECK(loss::total_loss(5.0, 2.0, c) == 5.0);
  c.kind = LossKind::kNone;
  c.beta = 1.0;
  CHECK(loss::total_loss(5.0, 2.0, c) == 5.0);
}

TEST_CASE("lm_nll") {
  std::vector<num::Tensor> lp = {num::Tensor::vector({std::log(0.25), std::log(0.25), std::log(0.25), std::log(0.25)})};
  CHECK(loss::lm_nll(lp, std::vector<TokenId>{2}) == doctest::Approx(std::log(4.0)));
  std::vector<num::Tensor> two = {num::Tensor::vector({-1.0, -9.0}), num::Tensor::vector({-9.0, -3.0})};
  CHECK(loss::lm_nll(two, std::vector<TokenId>{0, 1}) == doctest::Approx(2.0));
  std::vector<num::Tensor> sure = {num::Tensor::vector({0.0, -1e300})};
  CHECK(loss::lm_nll(sure, std::vector<TokenId>{0}) == 0.0);
}

TEST_CASE("binary prediction loss") {
  loss::BinaryHead zero(3);
  std::vector<num::Tensor> h = {num::Tensor::vector({0.2, -0.4, 1.0})};
  CHECK(loss::binary_pred_loss(h, std::vector{negex::Number::kPlural}, zero) == doctest::Approx(std::log(2.0)));
  loss::BinaryHead head(1);
  head.params().get("binary.weight").value = num::Tensor({1, 2}, std::vector<double>{1.0, -1.0});
  std::vector<num::Tensor> one = {num::Tensor::vector({1.0})};
  CHECK(loss::binary_pred_loss(one, std::vector{negex::Number::kSingular}, head) ==
        doctest::Approx(0.126928).epsilon(1e-5));
}

TEST_CASE("loss kind names round-trip") {
  for (auto k : {LossKind::kNone, LossKind::kBinary, LossKind::kUnlikelihood, LossKind::kSentenceMargin,
                 LossKind::kTokenMargin}) {
    CHECK(loss::parse_loss_kind(loss::loss_kind_name(k)) == k);
  }
  CHECK_THROWS_AS(loss::parse_loss_kind("hinge"), std::invalid_argument);
  LossConfig bad;
  bad.delta = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("batch loss equals per-sentence recomputation") {
  auto lm = tiny_model(3);
  loss::BinaryHead head(8);
  Rng hr(4);
  head.initialize(hr, 0.5);
  const auto corpus = tiny_corpus();
  std::vector<const EncodedSentence*> batch;
  for (const auto& s : corpus) batch.push_back(&s);

  // Independent oracle: per-sentence eval forwards and the scalar term functions.
  double nll = 0.0, ul = 0.0, tm = 0.0, bin = 0.0;
  std::size_t tokens = 0;
  for (const auto& s : corpus) {
    const auto lp = model::forward(lm, s.tokens);
    const auto hs = model::hidden_states(lm, s.tokens);
    for (std::size_t t = 0; t <= s.tokens.size(); ++t) {
      nll -= lp[t][t < s.tokens.size() ? s.tokens[t] : Vocabulary::kEos];
    }
    tokens += s.tokens.size() + 1;
    for (const auto& tg : s.targets) {
      for (TokenId n : tg.negatives) {
        ul += loss::unlikelihood_term(lp[tg.position][n], 1000.0);
        tm += loss::token_margin_term(lp[tg.position][tg.correct], lp[tg.position][n], 10.0);
      }
      bin += loss::binary_pred_loss(std::span(&hs[tg.position], 1), std::vector{tg.number}, head);
    }
  }
  const double n = static_cast<double>(tokens);

  struct Values {
    double lm, aux, total;
    std::size_t tokens;
  };
  auto run = [&](LossKind kind, double alpha) {
    LossConfig c;
    c.kind = kind;
    c.alpha = alpha;
    num::Graph g(false);
    const auto bl = loss::batch_loss(g, lm, &head, batch, c, model::Mode::kEval, nullptr);
    return Values{bl.lm, bl.aux, bl.total.scalar(), bl.tokens};
  };
  const auto none = run(LossKind::kNone, 1.0);
  CHECK(none.tokens == tokens);
  CHECK(none.lm == doctest::Approx(nll / n).epsilon(1e-12));
  CHECK(none.total == doctest::Approx(nll / n).epsilon(1e-12));
  CHECK(run(LossKind::kUnlikelihood, 1000.0).aux == doctest::Approx(ul / n).epsilon(1e-10));
  CHECK(run(LossKind::kTokenMargin, 1.0).aux == doctest::Approx(tm / n).epsilon(1e-10));
  CHECK(run(LossKind::kBinary, 1.0).aux == doctest::Approx(bin / n).epsilon(1e-10));

  // Sentence margin over all pairs.
  const auto pairs = loss::enumerate_margin_pairs(corpus);
  REQUIRE(pairs.size() == 4);
  double sm = 0.0;
  std::size_t pos_tokens = 0;
  for (const auto& p : pairs) {
    const auto& s = corpus[p.sentence];
    sm += loss::sentence_margin_term(model::sentence_logprob(lm, s.tokens),
                                     model::sentence_logprob(lm, loss::negative_sentence(s, p)), 10.0);
    pos_tokens += s.tokens.size() + 1;
  }
  LossConfig c;
  c.kind = LossKind::kSentenceMargin;
  c.beta = 2.0;
  num::Graph g(false);
  const auto m = loss::margin_batch_loss(g, lm, corpus, pairs, c, model::Mode::kEval, nullptr);
  CHECK(m.aux == doctest::Approx(sm / static_cast<double>(pos_tokens)).epsilon(1e-10));
  CHECK(m.total.scalar() == doctest::Approx(2.0 * sm / static_cast<double>(pos_tokens)).epsilon(1e-10));
}

TEST_CASE("negative sentences and margin pairs") {
  const auto corpus = tiny_corpus();
  const auto pairs = loss::enumerate_margin_pairs(corpus);
  for (const auto& p : pairs) {
    const auto neg = loss::negative_sentence(corpus[p.sentence], p);
    const auto& pos = corpus[p.sentence].tokens;
    REQUIRE(neg.size() == pos.size());
    std::size_t diff = 0;
    for (std::size_t i = 0; i < pos.size(); ++i) diff += pos[i] != neg[i];
    CHECK(diff == 1);
  }
}

TEST_CASE("gradients of every loss on a tiny model") {
  const auto corpus = tiny_corpus();
  std::vector<const EncodedSentence*> batch;
  for (const auto& s : corpus) batch.push_back(&s);
  for (auto kind : {LossKind::kNone, LossKind::kBinary, LossKind::kUnlikelihood, LossKind::kTokenMargin}) {
    CAPTURE(loss::loss_kind_name(kind));
    auto lm = tiny_model(7);
    loss::BinaryHead head(8);
    Rng hr(8);
    head.initialize(hr, 0.5);
    LossConfig c;
    c.kind = kind;
    c.alpha = kind == LossKind::kUnlikelihood ? 1000.0 : 1.0;
    std::vector<num::ParameterStore*> stores = {&lm.params()};
    if (kind == LossKind::kBinary) stores.push_back(&head.params());
    auto res = testing::check_gradients(stores, [&](num::Graph& g) {
      Rng r(1);
      return loss::batch_loss(g, lm, &head, batch, c, model::Mode::kTrain, &r).total;
    });
    CAPTURE(res.worst);
    CHECK(res.worst_error <= 1e-4);
  }
  auto lm = tiny_model(9);
  const auto pairs = loss::enumerate_margin_pairs(corpus);
  LossConfig c;
  c.kind = LossKind::kSentenceMargin;
  auto res = testing::check_gradients({&lm.params()}, [&](num::Graph& g) {
    return loss::margin_batch_loss(g, lm, corpus, pairs, c, model::Mode::kEval, nullptr).total;
  });
  CAPTURE(res.worst);
  CHECK(res.worst_error <= 1e-4);
}

TEST_CASE("encode drops out-of-vocabulary negatives") {
  const auto vocab = Vocabulary::from_tokens(std::vector<std::string>{"the", "author", "laughs", "laugh"});
  negex::AnnotatedSentence s;
  s.tokens = {"the", "author", "laughs", "."};
  s.targets = {{2, negex::TargetKind::kPresentVerb, negex::Number::kSingular, "laugh", {"laugh"}}};
  auto e = loss::encode(s, vocab);
  REQUIRE(e.targets.size() == 1);
  CHECK(e.targets[0].negatives == std::vector<TokenId>{vocab.id("laugh")});
  CHECK(e.tokens[3] == Vocabulary::kUnk);
  s.targets[0].negatives = {"giggle"};
  CHECK(loss::encode(s, vocab).targets[0].negatives.empty());
}
