#include <benchmark/benchmark.h>

#include "negexlm/corpus.hpp"
#include "negexlm/inflect.hpp"
#include "negexlm/lexicon.hpp"
#include "negexlm/losses.hpp"
#include "negexlm/syneval.hpp"

using namespace negexlm;

namespace {

model::LanguageModel desk_model(std::size_t vocab) {
  model::LmConfig c;
  c.vocab_size = vocab;
  model::LanguageModel lm(c);
  Rng rng(1);
  lm.initialize(rng);
  return lm;
}

std::vector<loss::EncodedSentence> encoded_batch(std::size_t batch, std::size_t length, std::size_t vocab) {
  Rng rng(2);
  std::vector<loss::EncodedSentence> out(batch);
  for (auto& s : out) {
    for (std::size_t t = 0; t < length; ++t) s.tokens.push_back(static_cast<TokenId>(3 + rng.below(vocab - 3)));
    s.targets.push_back({2, s.tokens[2], {s.tokens[3]}, negex::Number::kSingular});
  }
  return out;
}

void BM_TrainStep(benchmark::State& state, loss::LossKind kind) {
  const std::size_t B = static_cast<std::size_t>(state.range(0));
  const std::size_t T = 9, V = 200;
  auto lm = desk_model(V);
  const auto data = encoded_batch(B, T, V);
  std::vector<const loss::EncodedSentence*> batch;
  for (const auto& s : data) batch.push_back(&s);
  loss::LossConfig cfg;
  cfg.kind = kind;
  Rng rng(3);
  for (auto _ : state) {
    num::Graph g;
    g.register_parameters(lm.params());
    auto bl = loss::batch_loss(g, lm, nullptr, batch, cfg, model::Mode::kTrain, &rng);
    auto grads = g.backward(bl.total);
    num::sgd_step(lm.params(), grads, 1e-3, 0.0);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * B * (T + 1)));
}
BENCHMARK_CAPTURE(BM_TrainStep, lm, loss::LossKind::kNone)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_TrainStep, token_margin, loss::LossKind::kTokenMargin)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_SentenceLogprobs(benchmark::State& state) {
  auto lm = desk_model(200);
  std::vector<TokenIds> sentences;
  for (const auto& s : encoded_batch(256, 9, 200)) sentences.push_back(s.tokens);
  for (auto _ : state) benchmark::DoNotOptimize(model::sentence_logprobs(lm, sentences));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * sentences.size()));
}
BENCHMARK(BM_SentenceLogprobs)->Unit(benchmark::kMillisecond);

void BM_GenerateCorpus(benchmark::State& state) {
  const negex::Inflector inflector;
  corpus::CorpusConfig cfg;
  cfg.num_sentences = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(corpus::generate_synthetic(cfg, corpus::Lexicon::builtin(), inflector));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * cfg.num_sentences));
}
BENCHMARK(BM_GenerateCorpus)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_GenerateSuite(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        syneval::generate_suite(corpus::Lexicon::builtin(), syneval::suite_constructions(), 200, 7));
  }
}
BENCHMARK(BM_GenerateSuite)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
