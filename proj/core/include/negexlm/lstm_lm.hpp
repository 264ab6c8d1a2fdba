#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "negexlm/graph.hpp"
#include "negexlm/rng.hpp"
#include "negexlm/vocab.hpp"

namespace negexlm::model {

struct LmConfig {
  std::size_t num_layers = 2;
  std::size_t embed_dim = 64;
  std::size_t hidden_dim = 128;
  std::size_t vocab_size = 0;
  double dropout_embed = 0.1;
  double dropout_hidden = 0.1;
  bool tie_embeddings = true;

  /// Throws std::invalid_argument on an inconsistent configuration.
  void validate() const;
  friend bool operator==(const LmConfig&, const LmConfig&) = default;
};

enum class Mode { kTrain, kEval };

/// Multi-layer LSTM language model over whole sentences. Each sentence is
/// read as BOS x_1 ... x_n and predicts x_1 ... x_n EOS.
///
/// Parameters: "embedding" (V x E); per layer l "lstm.<l>.w_input"
/// (in x 4H), "lstm.<l>.w_hidden" (H x 4H), "lstm.<l>.bias" (4H) with gate
/// blocks ordered input, forget, candidate, output; "output.bias" (V).
/// With tied embeddings the output logits are (h * "output.projection") *
/// embedding^T, otherwise h * "output.weight" (H x V).
class LanguageModel {
 public:
  /// All parameters zero.
  explicit LanguageModel(LmConfig config);

  /// Uniform weights in [-range, range], zero biases, forget-gate bias 1.
  void initialize(Rng& rng, double range = 0.1);

  const LmConfig& config() const { return config_; }
  num::ParameterStore& params() { return params_; }
  const num::ParameterStore& params() const { return params_; }

  friend bool operator==(const LanguageModel& a, const LanguageModel& b) {
    return a.config_ == b.config_ && a.params_ == b.params_;
  }

 private:
  LmConfig config_;
  num::ParameterStore params_;
};

/// Graph outputs of a padded batch. Row t * batch + b holds the prediction
/// for position t of sentence b; rows past a sentence's EOS are padding.
struct BatchForward {
  num::Var log_probs;  // (steps * batch) x V
  num::Var hidden;     // (steps * batch) x H, top layer after dropout
  std::size_t batch = 0;
  std::size_t steps = 0;

  std::size_t row(std::size_t position, std::size_t sentence) const { return position * batch + sentence; }
};

/// Records the forward pass of a batch of sentences in g. rng may be null
/// in eval mode.
BatchForward forward_batch(num::Graph& g, LanguageModel& model, std::span<const TokenIds> sentences, Mode mode,
                           Rng* rng);

/// n + 1 log-probability vectors for a sentence of n tokens.
std::vector<num::Tensor> forward(LanguageModel& model, std::span<const TokenId> tokens, Mode mode = Mode::kEval,
                                 Rng* rng = nullptr);

/// n + 1 top-layer hidden states; index t conditions on BOS and tokens[0..t).
std::vector<num::Tensor> hidden_states(LanguageModel& model, std::span<const TokenId> tokens);

/// Sum of log p(next token) over the n + 1 predicted positions, eval mode.
double sentence_logprob(LanguageModel& model, std::span<const TokenId> tokens);

/// Batched sentence_logprob; sentences are scored in chunks of batch_size.
std::vector<double> sentence_logprobs(LanguageModel& model, std::span<const TokenIds> sentences,
                                      std::size_t batch_size = 64);

/// Checkpoint container: "NEGEXLM1" magic, the model config, the vocabulary
/// and every parameter tensor with its name and shape.
void save_checkpoint(const std::filesystem::path& path, const LanguageModel& model, const Vocabulary& vocab);
std::string serialize_checkpoint(const LanguageModel& model, const Vocabulary& vocab);

struct Checkpoint {
  LanguageModel model;
  Vocabulary vocab;
};
Checkpoint load_checkpoint(const std::filesystem::path& path);
Checkpoint parse_checkpoint(std::string_view bytes);

}  // namespace negexlm::model
