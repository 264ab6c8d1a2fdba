#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "negexlm/losses.hpp"
#include "negexlm/lstm_lm.hpp"

namespace negexlm::train {

struct TrainConfig {
  std::size_t batch_size = 32;
  double lr = 1.0;
  double weight_decay = 1.2e-6;
  double anneal_factor = 0.5;
  double min_lr = 1e-4;
  std::size_t check_interval = 200;  // LM mini-batches between dev evaluations
  std::size_t max_epochs = 4;
  double clip_norm = 0.0;  // 0 disables clipping
  std::uint64_t seed = 1;

  void validate() const;
};

/// exp(total NLL / predicted tokens) in eval mode, EOS included.
double perplexity(model::LanguageModel& lm, std::span<const TokenIds> corpus);

struct TrainRecord {
  std::size_t step = 0;
  double lr = 0.0;
  double lm_loss = 0.0;   // mean over LM batches since the previous record
  double aux_loss = 0.0;  // mean auxiliary term over the same interval
  double dev_ppl = 0.0;

  friend bool operator==(const TrainRecord&, const TrainRecord&) = default;
};

struct TrainLog {
  std::vector<TrainRecord> records;
  std::size_t best_step = 0;
  double best_dev_ppl = 0.0;
  bool aborted = false;
  std::string diagnostic;
  /// How the annealing condition was read.
  std::string anneal_rule = "halve when dev ppl >= best so far; floor min_lr";

  friend bool operator==(const TrainLog&, const TrainLog&) = default;
};

/// CSV with columns step,lr,lm_loss,aux_loss,dev_ppl; `comment` lines are
/// written first, each prefixed with "# ".
std::string trainlog_csv(const TrainLog& log, std::span<const std::string> comments = {});

/// Sentence-margin pair batches of max(1, batch_size / 2) pairs, drawn without
/// replacement from a fresh shuffle, at most lm_batches / 2 of them.
std::vector<std::vector<loss::MarginPair>> schedule_margin_batches(std::span<const loss::MarginPair> pairs,
                                                                   std::size_t lm_batches, std::size_t batch_size,
                                                                   Rng& rng);

/// Length-grouped mini-batches over indices [0, n): shuffled, sorted by
/// length inside pools of 50 batches, batch order shuffled.
std::vector<std::vector<std::size_t>> make_batches(std::span<const loss::EncodedSentence> corpus,
                                                   std::size_t batch_size, Rng& rng);

/// SGD with dev-perplexity annealing. On return the model (and head) hold the
/// parameters of the best dev checkpoint. A non-finite loss stops training
/// with log.aborted set; the best parameters seen so far are restored.
TrainLog train(model::LanguageModel& lm, loss::BinaryHead* head, std::span<const loss::EncodedSentence> train_set,
               std::span<const TokenIds> dev_set, const loss::LossConfig& loss_config, const TrainConfig& config);

}  // namespace negexlm::train
