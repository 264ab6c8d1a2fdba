#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "negexlm/corpus.hpp"
#include "negexlm/trainer.hpp"

using namespace negexlm;
using loss::EncodedSentence;

namespace {

model::LanguageModel small_lm(std::size_t vocab, std::uint64_t seed) {
  model::LmConfig c;
  c.num_layers = 1;
  c.embed_dim = 16;
  c.hidden_dim = 24;
  c.vocab_size = vocab;
  model::LanguageModel lm(c);
  Rng rng(seed);
  lm.initialize(rng);
  return lm;
}

struct Data {
  Vocabulary vocab;
  std::vector<EncodedSentence> train;
  std::vector<TokenIds> dev;
};

Data small_data(std::size_t n) {
  corpus::CorpusConfig c;
  c.num_sentences = n + n / 4;
  c.seed = 12;
  const negex::Inflector inf;
  const auto all = corpus::generate_synthetic(c, corpus::Lexicon::builtin(), inf);
  const negex::Corpus train(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n));
  Data d{corpus::build_vocab(all, 1), {}, {}};
  d.train = loss::encode(train, d.vocab);
  for (auto it = all.begin() + static_cast<std::ptrdiff_t>(n); it != all.end(); ++it) {
    d.dev.push_back(d.vocab.encode(it->tokens));
  }
  return d;
}

}  // namespace

TEST_CASE("perplexity") {
  model::LmConfig c;
  c.num_layers = 1;
  c.embed_dim = 3;
  c.hidden_dim = 3;
  c.vocab_size = 10;
  model::LanguageModel uniform(c);
  const std::vector<TokenIds> corpus = {{3, 4}, {5, 6, 7, 8}};
  CHECK(train::perplexity(uniform, corpus) == doctest::Approx(10.0).epsilon(1e-13));
  CHECK_THROWS(train::perplexity(uniform, std::vector<TokenIds>{}));

  auto lm = small_lm(10, 2);
  const double nll = -(model::sentence_logprob(lm, corpus[0]) + model::sentence_logprob(lm, corpus[1]));
  CHECK(train::perplexity(lm, corpus) == doctest::Approx(std::exp(nll / 8.0)).epsilon(1e-12));
}

TEST_CASE("margin batch schedule") {
  std::vector<loss::MarginPair> pairs(1000);
  for (std::size_t i = 0; i < pairs.size(); ++i) pairs[i].sentence = i;
  Rng rng(1);
  const auto b128 = train::schedule_margin_batches(pairs, 100, 128, rng);
  CHECK(b128.size() <= 50);
  for (const auto& b : b128) CHECK(b.size() <= 64);
  CHECK(b128.front().size() == 64);

  const auto cap = train::schedule_margin_batches(pairs, 100, 4, rng);
  CHECK(cap.size() == 50);
  std::set<std::size_t> seen;
  for (const auto& b : cap) {
    for (const auto& p : b) CHECK(seen.insert(p.sentence).second);
  }
  CHECK(train::schedule_margin_batches({}, 100, 32, rng).empty());
}

TEST_CASE("batches cover the corpus once") {
  const auto d = small_data(200);
  Rng rng(3);
  const auto batches = train::make_batches(d.train, 32, rng);
  std::multiset<std::size_t> seen;
  for (const auto& b : batches) {
    CHECK(b.size() <= 32);
    seen.insert(b.begin(), b.end());
  }
  CHECK(seen.size() == 200);
  CHECK(std::set<std::size_t>(seen.begin(), seen.end()).size() == 200);
}

TEST_CASE("annealing halves the rate when dev perplexity does not improve") {
  // The dev sentence repeats a token that never occurs in training, so every
  // update lowers its probability and dev perplexity never improves.
  const auto d = small_data(64);
  const TokenId unseen = static_cast<TokenId>(d.vocab.size());
  auto lm = small_lm(d.vocab.size() + 1, 5);
  train::TrainConfig tc;
  tc.batch_size = 8;
  tc.lr = 20.0;
  tc.clip_norm = 1.0;
  tc.check_interval = 1;
  tc.max_epochs = 1;
  const std::vector<TokenIds> dev = {TokenIds(40, unseen)};
  const auto log = train::train(lm, nullptr, d.train, dev, {}, tc);
  REQUIRE(log.records.size() == 8);
  CHECK(log.records[0].lr == 20.0);
  CHECK(log.records[1].lr == 10.0);
  CHECK(log.records[2].lr == 5.0);
  CHECK(log.records[3].lr == 2.5);
  CHECK(log.best_step == 0);

  tc.min_lr = 4.0;
  auto again = small_lm(d.vocab.size() + 1, 5);
  const auto floored = train::train(again, nullptr, d.train, dev, {}, tc);
  CHECK(floored.records[2].lr == 5.0);
  CHECK(floored.records[3].lr == 4.0);
  CHECK(floored.records[7].lr == 4.0);
}

TEST_CASE("smoke training beats the uniform model and is deterministic") {
  const auto d = small_data(100);
  train::TrainConfig tc;
  tc.batch_size = 10;
  tc.lr = 1.0;
  tc.clip_norm = 5.0;
  tc.check_interval = 5;
  tc.max_epochs = 5;
  auto a = small_lm(d.vocab.size(), 7);
  const auto log_a = train::train(a, nullptr, d.train, d.dev, {}, tc);
  CHECK_FALSE(log_a.aborted);
  CHECK(log_a.best_dev_ppl < static_cast<double>(d.vocab.size()));
  CHECK(train::perplexity(a, d.dev) == log_a.best_dev_ppl);
  for (std::size_t i = 1; i < log_a.records.size(); ++i) CHECK(log_a.records[i].step > log_a.records[i - 1].step);

  auto b = small_lm(d.vocab.size(), 7);
  const auto log_b = train::train(b, nullptr, d.train, d.dev, {}, tc);
  CHECK(log_a == log_b);
  CHECK(a == b);

  // Annotations do not affect the baseline objective.
  std::vector<EncodedSentence> stripped;
  for (const auto& s : d.train) stripped.push_back({s.tokens, {}});
  auto c = small_lm(d.vocab.size(), 7);
  CHECK(train::train(c, nullptr, stripped, d.dev, {}, tc) == log_a);

  // Sentence-margin training with no pairs reduces to the baseline.
  loss::LossConfig sm;
  sm.kind = loss::LossKind::kSentenceMargin;
  auto e = small_lm(d.vocab.size(), 7);
  CHECK(train::train(e, nullptr, stripped, d.dev, sm, tc).records == log_a.records);
}

TEST_CASE("auxiliary losses train") {
  const auto d = small_data(60);
  train::TrainConfig tc;
  tc.batch_size = 10;
  tc.lr = 1.0;
  tc.clip_norm = 5.0;
  tc.check_interval = 3;
  tc.max_epochs = 2;
  for (auto kind : {loss::LossKind::kBinary, loss::LossKind::kUnlikelihood, loss::LossKind::kTokenMargin,
                    loss::LossKind::kSentenceMargin}) {
    CAPTURE(loss::loss_kind_name(kind));
    loss::LossConfig lc;
    lc.kind = kind;
    auto lm = small_lm(d.vocab.size(), 3);
    loss::BinaryHead head(24);
    Rng hr(4);
    head.initialize(hr);
    const auto log = train::train(lm, &head, d.train, d.dev, lc, tc);
    CHECK_FALSE(log.aborted);
    double aux = 0.0;
    for (const auto& r : log.records) aux += r.aux_loss;
    CHECK(aux > 0.0);
  }
}

TEST_CASE("train log csv and config validation") {
  train::TrainLog log;
  log.records = {{0, 1.0, 0.0, 0.0, 12.5}, {10, 0.5, 2.25, 0.125, 11.0}};
  const std::vector<std::string> comments = {"seed = 1"};
  const auto csv = train::trainlog_csv(log, comments);
  CHECK(csv == "# seed = 1\nstep,lr,lm_loss,aux_loss,dev_ppl\n0,1,0,0,12.5\n10,0.5,2.25,0.125,11\n");

  train::TrainConfig tc;
  tc.anneal_factor = 1.0;
  CHECK_THROWS_AS(tc.validate(), std::invalid_argument);
  tc = {};
  tc.batch_size = 0;
  CHECK_THROWS_AS(tc.validate(), std::invalid_argument);
}
