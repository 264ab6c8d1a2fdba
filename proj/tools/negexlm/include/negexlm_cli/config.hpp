#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "negexlm/corpus.hpp"
#include "negexlm/losses.hpp"
#include "negexlm/lstm_lm.hpp"
#include "negexlm/trainer.hpp"

namespace negexlm::cli {

/// Bad user input: unknown key, malformed value, failed validation. Maps to exit code 1.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
  std::filesystem::path out_dir = "runs";
  /// Where gen-corpus writes and the training commands read; empty means out_dir.
  std::filesystem::path data_dir;
  /// Suite file for eval; empty means generate from suite_* settings.
  std::filesystem::path suite_path;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::size_t threads = 1;

  corpus::CorpusConfig corpus;
  double train_fraction = 0.8;
  double dev_fraction = 0.1;
  double test_fraction = 0.1;
  std::size_t min_freq = 1;

  model::LmConfig model;  // vocab_size is taken from the vocabulary
  loss::LossConfig loss;
  train::TrainConfig train;

  std::size_t suite_per_construction = 200;
  std::uint64_t suite_seed = 7;

  std::vector<double> sweep_deltas = {0, 1, 5, 10, 15};
  std::vector<double> augment_multipliers = {1, 2, 4, 8};
  std::string ablate_mode = "token";
  std::string ablate_target = "across-orc";

  ExperimentConfig();

  /// Applies one "key = value" assignment. Throws ConfigError.
  void set(std::string_view key, std::string_view value);
  /// Every key with its current value, one "key = value" line each, sorted.
  std::string resolved() const;
  /// FNV-1a of resolved().
  std::string hash() const;
  void validate() const;

  std::filesystem::path data_path() const { return data_dir.empty() ? out_dir : data_dir; }
  static std::vector<std::string> keys();
};

/// Parses "key = value" lines; "#" starts a comment. Unknown keys and
/// repeated keys are errors reported with the line number.
void apply_config_text(ExperimentConfig& config, std::string_view text, std::string_view source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace negexlm::cli
