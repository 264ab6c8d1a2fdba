#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "negexlm/annotation.hpp"
#include "negexlm/lstm_lm.hpp"
#include "negexlm/syneval.hpp"
#include "negexlm/trainer.hpp"
#include "negexlm/vocab.hpp"
#include "negexlm_cli/config.hpp"

namespace negexlm::cli {

struct Dataset {
  Vocabulary vocab;
  negex::Corpus train;
  negex::Corpus dev;
  negex::Corpus test;
};

/// Generates, splits and builds the vocabulary from the training split.
Dataset generate_dataset(const ExperimentConfig& config);
/// train.tsv, dev.tsv, test.tsv, vocab.txt
void save_dataset(const std::filesystem::path& dir, const Dataset& data);
Dataset load_dataset(const std::filesystem::path& dir);

std::vector<syneval::TestCase> make_suite(const ExperimentConfig& config);

/// Target lemmas removed by token-level ablation: every verb that is a
/// target in the evaluation suite.
const std::set<std::string>& token_ablation_lemmas();

/// Training tags covered by a pattern ablation; across-orc covers both
/// complementizer variants.
std::vector<std::string> pattern_ablation_tags(std::string_view target);
/// Suite constructions evaluating a pattern-ablation target.
std::vector<std::string> pattern_ablation_suite(std::string_view target);
/// Non-local constructions evaluated by cmd_ablate.
const std::vector<std::string>& ablation_suite_constructions();

/// Sentences to add so that the object-RC share of corpus becomes `share`.
std::size_t extra_orc_for_share(const negex::Corpus& corpus, double share);
std::size_t orc_count(const negex::Corpus& corpus);

struct SeedRun {
  std::uint64_t seed;
  model::LanguageModel lm;
  train::TrainLog log;
  bool reused;  // loaded from an earlier run with the same key
};

/// Trains one seed into dir (model.ckpt, trainlog.csv, run.key). When dir
/// already holds a checkpoint whose run.key matches, it is loaded instead.
SeedRun train_seed(const ExperimentConfig& config, const Vocabulary& vocab, const negex::Corpus& train_set,
                   const negex::Corpus& dev_set, std::uint64_t seed, const std::filesystem::path& dir);

struct SeedEval {
  std::uint64_t seed = 0;
  syneval::SuiteReport report;
  std::vector<syneval::Outcome> outcomes;
  double test_ppl = 0.0;
};

SeedEval evaluate_seed(model::LanguageModel& lm, const Vocabulary& vocab, std::span<const syneval::TestCase> suite,
                       const negex::Corpus& test_set, std::size_t threads);

struct Stat {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation; 0 for a single value
};
Stat mean_sd(std::span<const double> values);

/// Per-construction accuracy across seeds, in suite order.
struct AggregateRow {
  std::string construction;
  std::size_t n = 0;  // cases per seed
  Stat accuracy;
};
struct Aggregate {
  std::vector<AggregateRow> rows;
  Stat perplexity;
  std::size_t seeds = 0;
  const AggregateRow* find(std::string_view construction) const;
};
Aggregate aggregate(std::span<const SeedEval> evals);
/// Mean/sd over seeds of the per-seed macro average of a category.
Stat macro_stat(std::span<const SeedEval> evals, std::string_view category);
/// Mean/sd over seeds of the pooled accuracy of several constructions.
Stat pooled_stat(std::span<const SeedEval> evals, std::span<const std::string> constructions);

std::string hash_comment(const ExperimentConfig& config);
std::string aggregate_csv(const Aggregate& agg, const ExperimentConfig& config);
/// Table of mean (sd) in percent, grouped by category, with a perplexity row.
std::string aggregate_markdown(const Aggregate& agg, std::string_view title);

/// Writes config.resolved into dir.
void write_resolved(const std::filesystem::path& dir, const ExperimentConfig& config);

}  // namespace negexlm::cli
