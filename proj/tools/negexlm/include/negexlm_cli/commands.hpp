#pragma once

#include <string>
#include <vector>

#include "negexlm_cli/config.hpp"
#include "negexlm_cli/experiment.hpp"

namespace negexlm::cli {

/// Writes train/dev/test/vocab into data_path() plus construction_counts.csv.
Dataset cmd_gen_corpus(const ExperimentConfig& config);

/// Writes out_dir/suite.tsv.
std::vector<syneval::TestCase> cmd_gen_suite(const ExperimentConfig& config);

/// One run per seed into out_dir/seed-<n>/.
std::vector<SeedRun> cmd_train(const ExperimentConfig& config);

struct EvalResult {
  std::vector<SeedEval> seeds;
  Aggregate aggregate;
};
/// Evaluates out_dir/seed-<n>/model.ckpt for every seed; writes per-seed
/// report.csv and eval.csv / eval.md in out_dir.
EvalResult cmd_eval(const ExperimentConfig& config);

struct SweepRow {
  std::string kind;
  double delta = 0.0;
  Stat agreement, reflexive, npi, perplexity;
};
/// Both margin kinds over sweep.deltas; delta 0 is the baseline. Writes sweep.csv and sweep_check.csv.
std::vector<SweepRow> cmd_sweep_margin(const ExperimentConfig& config);

struct AugmentRow {
  double multiplier = 1.0;
  std::size_t orc_sentences = 0;
  double orc_share = 0.0;
  Stat across_orc, across_orc_no_that, animate_orc, animate_orc_no_that, across_src;
};
/// Trains on object-RC-augmented training sets. Writes augment.csv.
std::vector<AugmentRow> cmd_augment_orc(const ExperimentConfig& config);

struct AblateResult {
  std::vector<SeedEval> seeds;
  Aggregate aggregate;
  std::vector<std::string> evaluated;  // suite constructions scored
};
/// Trains with ablate.mode/ablate.target negatives removed; writes ablate.csv and long_vp_breakdown.csv.
AblateResult cmd_ablate(const ExperimentConfig& config);

/// Entry point used by main(); returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace negexlm::cli
