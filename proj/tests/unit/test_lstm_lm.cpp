#include <cmath>
#include <vector>

#include "doctest.h"
#include "negexlm/lstm_lm.hpp"

using namespace negexlm;

namespace {

model::LanguageModel make(std::size_t layers, std::size_t e, std::size_t h, std::size_t v, bool tie,
                          std::uint64_t seed) {
  model::LmConfig c;
  c.num_layers = layers;
  c.embed_dim = e;
  c.hidden_dim = h;
  c.vocab_size = v;
  c.tie_embeddings = tie;
  model::LanguageModel lm(c);
  if (seed != 0) {
    Rng rng(seed);
    lm.initialize(rng, 0.5);
  }
  return lm;
}

}  // namespace

TEST_CASE("zero parameters give a uniform model") {
  auto lm = make(2, 4, 6, 9, true, 0);
  const TokenIds s = {3, 5, 8};
  const auto dists = model::forward(lm, s);
  REQUIRE(dists.size() == 4);
  for (const auto& d : dists) {
    for (std::size_t i = 0; i < 9; ++i) CHECK(d[i] == doctest::Approx(-std::log(9.0)).epsilon(1e-14));
  }
  CHECK(model::sentence_logprob(lm, s) == doctest::Approx(-4 * std::log(9.0)).epsilon(1e-14));
  CHECK(model::forward(lm, TokenIds{}).size() == 1);
}

TEST_CASE("outputs are normalised and causal") {
  for (bool tie : {true, false}) {
    auto lm = make(2, 5, 7, 11, tie, 3);
    const TokenIds a = {3, 4, 5, 6, 7};
    TokenIds b = a;
    b[3] = 10;
    const auto da = model::forward(lm, a);
    const auto db = model::forward(lm, b);
    for (std::size_t t = 0; t < da.size(); ++t) {
      double z = 0.0;
      for (std::size_t i = 0; i < 11; ++i) z += std::exp(da[t][i]);
      CHECK(z == doctest::Approx(1.0).epsilon(1e-12));
      // Positions 0..3 condition only on tokens before index 3.
      if (t <= 3) CHECK(da[t] == db[t]);
    }
    CHECK(da[4] != db[4]);
    CHECK(model::sentence_logprob(lm, a) <= 0.0);
  }
}

TEST_CASE("eval mode is deterministic and batching agrees") {
  auto lm = make(2, 5, 7, 11, true, 4);
  const std::vector<TokenIds> sents = {{3, 4}, {5, 6, 7, 8, 9}, {}, {10}};
  const auto batched = model::sentence_logprobs(lm, sents, 3);
  for (std::size_t i = 0; i < sents.size(); ++i) {
    CHECK(batched[i] == doctest::Approx(model::sentence_logprob(lm, sents[i])).epsilon(1e-12));
  }
  CHECK(model::sentence_logprobs(lm, sents, 3) == batched);

  const auto h = model::hidden_states(lm, sents[1]);
  CHECK(h.size() == 6);
  CHECK(h[0].size() == 7);
}

TEST_CASE("tiny model normalises over all short sentences") {
  auto lm = make(1, 3, 4, 4, true, 8);
  double total = 0.0;
  std::vector<TokenIds> frontier = {{}};
  for (int len = 0; len <= 3; ++len) {
    std::vector<TokenIds> next;
    for (const auto& s : frontier) {
      total += std::exp(model::sentence_logprob(lm, s));
      for (TokenId t = 0; t < 4; ++t) {
        if (t == Vocabulary::kEos) continue;  // EOS only terminates
        auto e = s;
        e.push_back(t);
        next.push_back(e);
      }
    }
    frontier = std::move(next);
  }
  CHECK(total <= 1.0 + 1e-9);
  CHECK(total > 0.0);
}

TEST_CASE("invalid input") {
  auto lm = make(1, 3, 4, 6, true, 1);
  CHECK_THROWS(model::forward(lm, TokenIds{6}));
  model::LmConfig bad;
  bad.vocab_size = 10;
  bad.num_layers = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.num_layers = 1;
  bad.dropout_hidden = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("checkpoint round-trip") {
  auto lm = make(2, 5, 7, 8, false, 6);
  const std::vector<std::string> toks = {"a", "b", "c", "d", "e"};
  const auto vocab = Vocabulary::from_tokens(toks);
  const auto bytes = model::serialize_checkpoint(lm, vocab);
  auto ck = model::parse_checkpoint(bytes);
  CHECK(ck.model == lm);
  CHECK(ck.vocab == vocab);
  CHECK(model::serialize_checkpoint(ck.model, ck.vocab) == bytes);
  const TokenIds s = {3, 4, 7};
  CHECK(model::sentence_logprob(ck.model, s) == model::sentence_logprob(lm, s));
  CHECK_THROWS(model::parse_checkpoint(bytes.substr(0, bytes.size() / 2)));
  CHECK_THROWS(model::parse_checkpoint("garbage"));
}
