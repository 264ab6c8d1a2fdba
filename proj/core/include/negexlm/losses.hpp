#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "negexlm/annotation.hpp"
#include "negexlm/graph.hpp"
#include "negexlm/lstm_lm.hpp"
#include "negexlm/vocab.hpp"

namespace negexlm::loss {

enum class LossKind { kNone, kBinary, kUnlikelihood, kSentenceMargin, kTokenMargin };

std::string_view loss_kind_name(LossKind k);
LossKind parse_loss_kind(std::string_view s);

struct LossConfig {
  LossKind kind = LossKind::kNone;
  double alpha = 1.0;  // unlikelihood / token-margin weight
  double beta = 1.0;   // binary / sentence-margin weight
  double delta = 10.0; // margin

  void validate() const;
  friend bool operator==(const LossConfig&, const LossConfig&) = default;
};

/// Linear layer plus binary softmax predicting the number of the next target
/// word. Parameters "binary.weight" (H x 2) and "binary.bias" (2); column 0
/// is singular, column 1 plural.
class BinaryHead {
 public:
  explicit BinaryHead(std::size_t hidden_dim);
  void initialize(Rng& rng, double range = 0.1);
  num::ParameterStore& params() { return params_; }
  const num::ParameterStore& params() const { return params_; }
  std::size_t hidden_dim() const { return hidden_dim_; }

 private:
  std::size_t hidden_dim_;
  num::ParameterStore params_;
};

// Scalar forms of the individual terms.

/// Mean of -log p(target) over positions; log_probs[i] scores targets[i].
double lm_nll(std::span<const num::Tensor> log_probs, std::span<const TokenId> targets);
/// Sum over targets of -log softmax(h W + b)[label].
double binary_pred_loss(std::span<const num::Tensor> hidden, std::span<const negex::Number> labels,
                        const BinaryHead& head);
/// -alpha * log(1 - exp(logp_neg)) with the probability clamped to 1 - 1e-12.
double unlikelihood_term(double logp_neg, double alpha);
double token_margin_term(double logp_correct, double logp_neg, double delta);
double sentence_margin_term(double logp_x, double logp_xneg, double delta);
/// Combines the LM loss with an auxiliary component per the loss kind.
double total_loss(double lm, double aux, const LossConfig& config);
num::Var total_loss(num::Var lm, num::Var aux, const LossConfig& config);

/// Training sentence in id space. Negatives outside the vocabulary are dropped;
/// a target keeps its number label even when no negative survives.
struct EncodedTarget {
  std::size_t position = 0;
  TokenId correct = 0;
  std::vector<TokenId> negatives;
  negex::Number number = negex::Number::kSingular;
};

struct EncodedSentence {
  TokenIds tokens;
  std::vector<EncodedTarget> targets;
};

EncodedSentence encode(const negex::AnnotatedSentence& s, const Vocabulary& vocab);
std::vector<EncodedSentence> encode(std::span<const negex::AnnotatedSentence> corpus, const Vocabulary& vocab);

/// Loss of one mini-batch. All sums are divided by the number of predicted
/// tokens in the batch (EOS included), so token-level auxiliary terms sit
/// inside the same per-token average as the LM loss.
struct BatchLoss {
  num::Var total;
  double lm = 0.0;
  double aux = 0.0;
  std::size_t tokens = 0;
};

/// LM loss plus the in-batch auxiliary term of the configured kind. For
/// kSentenceMargin and kNone only the LM loss is produced. head is required
/// for kBinary.
BatchLoss batch_loss(num::Graph& g, model::LanguageModel& lm, BinaryHead* head,
                     std::span<const EncodedSentence* const> batch, const LossConfig& config, model::Mode mode,
                     Rng* rng);

/// One (sentence, negative sentence) pair: negative `negative` of target `target`.
struct MarginPair {
  std::size_t sentence = 0;
  std::size_t target = 0;
  std::size_t negative = 0;
  friend bool operator==(const MarginPair&, const MarginPair&) = default;
};

std::vector<MarginPair> enumerate_margin_pairs(std::span<const EncodedSentence> corpus);
TokenIds negative_sentence(const EncodedSentence& s, const MarginPair& p);

/// beta * sum of sentence-margin hinges over the pairs, divided by the
/// predicted-token count of the positive sentences.
BatchLoss margin_batch_loss(num::Graph& g, model::LanguageModel& lm, std::span<const EncodedSentence> corpus,
                            std::span<const MarginPair> pairs, const LossConfig& config, model::Mode mode, Rng* rng);

}  // namespace negexlm::loss
