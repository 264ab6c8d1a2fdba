#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "negexlm/text_io.hpp"
#include "negexlm_cli/commands.hpp"

using namespace negexlm;
using cli::ConfigError;
using cli::ExperimentConfig;
namespace fs = std::filesystem;

TEST_CASE("config text") {
  ExperimentConfig c;
  cli::apply_config_text(c,
                         "# desk run\n"
                         "loss.kind = token-margin\n"
                         "loss.delta = 5   # smaller margin\n"
                         "seeds = 3, 4\n"
                         "corpus.num_sentences = 1200\n"
                         "\n"
                         "train.lr = 0.5\n");
  CHECK(c.loss.kind == loss::LossKind::kTokenMargin);
  CHECK(c.loss.delta == 5.0);
  CHECK(c.seeds == std::vector<std::uint64_t>{3, 4});
  CHECK(c.corpus.num_sentences == 1200);
  CHECK(c.train.lr == 0.5);

  ExperimentConfig d;
  CHECK_THROWS_WITH_AS(cli::apply_config_text(d, "a = 1\n", "x.cfg"), doctest::Contains("x.cfg:1"), ConfigError);
  CHECK_THROWS_AS(cli::apply_config_text(d, "train.lr = 1\ntrain.lr = 2\n"), ConfigError);
  CHECK_THROWS_AS(cli::apply_config_text(d, "train.lr 1\n"), ConfigError);
  CHECK_THROWS_AS(d.set("train.batch_size", "many"), ConfigError);
  CHECK_THROWS_AS(d.set("loss.kind", "hinge"), ConfigError);
}

TEST_CASE("resolved config round-trips") {
  ExperimentConfig c;
  c.set("loss.kind", "unlikelihood");
  c.set("loss.alpha", "1000");
  c.set("corpus.mix.simple", "0.25");
  c.set("corpus.mix.in-complement", "0.15");
  c.set("sweep.deltas", "0, 2.5");
  const auto text = c.resolved();
  ExperimentConfig back;
  cli::apply_config_text(back, text);
  CHECK(back.resolved() == text);
  CHECK(back.hash() == c.hash());
  CHECK(back.sweep_deltas == std::vector<double>{0, 2.5});
  CHECK(text.find("loss.alpha = 1000\n") != std::string::npos);

  ExperimentConfig other = c;
  other.set("train.lr", "3");
  CHECK(other.hash() != c.hash());

  for (const auto& key : ExperimentConfig::keys()) {
    CAPTURE(key);
    CHECK(text.find(key + " = ") != std::string::npos);
  }
}

TEST_CASE("config validation") {
  ExperimentConfig c;
  CHECK_NOTHROW(c.validate());
  c.set("corpus.mix.simple", "0.9");
  CHECK_THROWS_AS(c.validate(), ConfigError);
  ExperimentConfig d;
  d.set("corpus.train_fraction", "0.9");
  CHECK_THROWS_AS(d.validate(), ConfigError);
  ExperimentConfig e;
  e.set("ablate.mode", "pattern");
  e.set("ablate.target", "simple");
  CHECK_THROWS_AS(e.validate(), ConfigError);
}

TEST_CASE("statistics") {
  const std::vector<double> one = {0.7};
  CHECK(cli::mean_sd(one).mean == 0.7);
  CHECK(cli::mean_sd(one).sd == 0.0);
  const std::vector<double> v = {1, 2, 3, 4};
  CHECK(cli::mean_sd(v).mean == doctest::Approx(2.5));
  CHECK(cli::mean_sd(v).sd == doctest::Approx(std::sqrt(5.0 / 3.0)));
}

TEST_CASE("object-RC augmentation sizing") {
  negex::Corpus c(1000);
  for (std::size_t i = 0; i < 20; ++i) c[i].construction = i % 2 ? "across-orc" : "across-orc-no-that";
  CHECK(cli::orc_count(c) == 20);
  const auto extra = cli::extra_orc_for_share(c, 0.16);
  CHECK(extra == 167);  // (160 - 20) / 0.84 = 166.67
  CHECK(std::abs(static_cast<double>(20 + extra) / static_cast<double>(1000 + extra) - 0.16) < 0.001);
  CHECK(cli::extra_orc_for_share(c, 0.01) == 0);
}

TEST_CASE("ablation helpers") {
  CHECK(cli::token_ablation_lemmas().size() == 13);
  CHECK(cli::token_ablation_lemmas().count("be") == 1);
  CHECK(cli::pattern_ablation_tags("across-orc") == std::vector<std::string>{"across-orc", "across-orc-no-that"});
  CHECK(cli::pattern_ablation_suite("long-vp") == std::vector<std::string>{"long-vp-coord"});
  CHECK_THROWS_AS(cli::pattern_ablation_tags("simple"), ConfigError);
}

TEST_CASE("aggregation") {
  std::vector<cli::SeedEval> evals(2);
  const std::vector<syneval::TestCase> suite = {
      {{"a"}, {"b"}, "across-orc", 0}, {{"a"}, {"b"}, "across-orc", 0}, {{"a"}, {"b"}, "across-orc-no-that", 0},
      {{"a"}, {"b"}, "simple-agr", 0}};
  using O = syneval::Outcome;
  evals[0].outcomes = {O::kCorrect, O::kCorrect, O::kIncorrect, O::kCorrect};
  evals[1].outcomes = {O::kCorrect, O::kIncorrect, O::kIncorrect, O::kCorrect};
  for (auto& e : evals) e.report = syneval::summarize(suite, e.outcomes);
  evals[0].test_ppl = 4.0;
  evals[1].test_ppl = 6.0;

  const auto agg = cli::aggregate(evals);
  CHECK(agg.seeds == 2);
  CHECK(agg.perplexity.mean == 5.0);
  CHECK(agg.find("across-orc")->accuracy.mean == doctest::Approx(0.75));
  const std::vector<std::string> orc = {"across-orc", "across-orc-no-that"};
  // Pooled per seed: 2/3 and 1/3.
  CHECK(cli::pooled_stat(evals, orc).mean == doctest::Approx(0.5));
  // Macro per seed: (1 + 0 + 1) / 3 and (0.5 + 0 + 1) / 3.
  CHECK(cli::macro_stat(evals, "agreement").mean == doctest::Approx((2.0 / 3 + 0.5) / 2));

  ExperimentConfig c;
  const auto csv = cli::aggregate_csv(agg, c);
  CHECK(csv.rfind("# config-hash: " + c.hash(), 0) == 0);
  CHECK(csv.find("perplexity") != std::string::npos);
  CHECK(cli::aggregate_markdown(agg, "t").find("75.0") != std::string::npos);
}

TEST_CASE("command-line driver") {
  const fs::path dir = fs::temp_directory_path() / "negexlm-cli-test";
  fs::remove_all(dir);
  const std::string out = (dir / "run").string();
  auto run = [](std::vector<std::string> args) {
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return cli::run_cli(static_cast<int>(argv.size()), argv.data());
  };
  CHECK(run({"negexlm", "gen-corpus", "--out", out, "--set", "corpus.num_sentences=300"}) == 0);
  CHECK(fs::exists(dir / "run" / "train.tsv"));
  CHECK(fs::exists(dir / "run" / "config.resolved"));
  CHECK(run({"negexlm", "gen-corpus", "--out", out, "--set", "no.such.key=1"}) == 1);
  CHECK(run({"negexlm", "bogus-command"}) != 0);
  CHECK(run({"negexlm", "eval", "--out", (dir / "missing").string(), "--set", "seeds=1"}) == 2);
  fs::remove_all(dir);
}
