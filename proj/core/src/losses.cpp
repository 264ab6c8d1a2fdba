#include "negexlm/losses.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace negexlm::loss {

using num::Cell;
using num::Var;

std::string_view loss_kind_name(LossKind k) {
  switch (k) {
    case LossKind::kNone: return "none";
    case LossKind::kBinary: return "binary";
    case LossKind::kUnlikelihood: return "unlikelihood";
    case LossKind::kSentenceMargin: return "sentence-margin";
    case LossKind::kTokenMargin: return "token-margin";
  }
  return "none";
}

LossKind parse_loss_kind(std::string_view s) {
  for (LossKind k : {LossKind::kNone, LossKind::kBinary, LossKind::kUnlikelihood, LossKind::kSentenceMargin,
                     LossKind::kTokenMargin}) {
    if (loss_kind_name(k) == s) return k;
  }
  throw std::invalid_argument("unknown loss kind '" + std::string(s) + "'");
}

void LossConfig::validate() const {
  for (double w : {alpha, beta, delta}) {
    if (!std::isfinite(w) || w < 0.0) throw std::invalid_argument("loss weights must be finite and nonnegative");
  }
}

BinaryHead::BinaryHead(std::size_t hidden_dim) : hidden_dim_(hidden_dim) {
  if (hidden_dim == 0) throw std::invalid_argument("BinaryHead: hidden_dim must be positive");
  params_.add("binary.weight", num::Tensor({hidden_dim, 2}));
  params_.add("binary.bias", num::Tensor({2}));
}

void BinaryHead::initialize(Rng& rng, double range) {
  for (double& w : params_.get("binary.weight").value.values()) w = rng.uniform(-range, range);
  for (double& b : params_.get("binary.bias").value.values()) b = 0.0;
}

namespace {

std::size_t label_index(negex::Number n) { return n == negex::Number::kSingular ? 0 : 1; }

}  // namespace

double lm_nll(std::span<const num::Tensor> log_probs, std::span<const TokenId> targets) {
  if (log_probs.size() != targets.size()) throw std::invalid_argument("lm_nll: one target per position required");
  if (targets.empty()) throw std::invalid_argument("lm_nll: no positions");
  double total = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    auto lp = log_probs[i].values();
    if (targets[i] >= lp.size()) throw std::out_of_range("lm_nll: target outside distribution");
    total -= lp[targets[i]];
  }
  return total / static_cast<double>(targets.size());
}

double binary_pred_loss(std::span<const num::Tensor> hidden, std::span<const negex::Number> labels,
                        const BinaryHead& head) {
  if (hidden.size() != labels.size()) throw std::invalid_argument("binary_pred_loss: one label per state required");
  const auto& w = head.params().get("binary.weight").value.as_matrix();
  const auto& b = head.params().get("binary.bias").value.as_matrix();
  double total = 0.0;
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    const auto& h = hidden[i].as_matrix();
    if (h.rows() != 1 || h.cols() != w.rows()) throw std::invalid_argument("binary_pred_loss: hidden size mismatch");
    num::Matrix logits = h * w + b;
    auto lp = num::log_softmax(std::span<const double>(logits.data(), 2));
    total -= lp[label_index(labels[i])];
  }
  return total;
}

double unlikelihood_term(double logp_neg, double alpha) {
  const double p = std::min(std::exp(logp_neg), 1.0 - 1e-12);
  return -alpha * std::log1p(-p);
}

double token_margin_term(double logp_correct, double logp_neg, double delta) {
  return std::max(0.0, delta - (logp_correct - logp_neg));
}

double sentence_margin_term(double logp_x, double logp_xneg, double delta) {
  return std::max(0.0, delta - (logp_x - logp_xneg));
}

double total_loss(double lm, double aux, const LossConfig& config) {
  switch (config.kind) {
    case LossKind::kNone: return lm;
    case LossKind::kBinary:
    case LossKind::kSentenceMargin: return lm + config.beta * aux;
    case LossKind::kUnlikelihood:
    case LossKind::kTokenMargin: return lm + aux;
  }
  return lm;
}

Var total_loss(Var lm, Var aux, const LossConfig& config) {
  switch (config.kind) {
    case LossKind::kNone: return lm;
    case LossKind::kBinary:
    case LossKind::kSentenceMargin: return config.beta == 0.0 ? lm : num::add(lm, num::scale(aux, config.beta));
    case LossKind::kUnlikelihood:
    case LossKind::kTokenMargin: return num::add(lm, aux);
  }
  return lm;
}

EncodedSentence encode(const negex::AnnotatedSentence& s, const Vocabulary& vocab) {
  EncodedSentence out;
  out.tokens = vocab.encode(s.tokens);
  for (const auto& t : s.targets) {
    EncodedTarget et;
    et.position = t.position;
    et.correct = out.tokens[t.position];
    et.number = t.number;
    for (const auto& neg : t.negatives) {
      if (vocab.contains(neg)) et.negatives.push_back(vocab.id(neg));
    }
    out.targets.push_back(std::move(et));
  }
  return out;
}

std::vector<EncodedSentence> encode(std::span<const negex::AnnotatedSentence> corpus, const Vocabulary& vocab) {
  std::vector<EncodedSentence> out;
  out.reserve(corpus.size());
  for (const auto& s : corpus) out.push_back(encode(s, vocab));
  return out;
}

BatchLoss batch_loss(num::Graph& g, model::LanguageModel& lm, BinaryHead* head,
                     std::span<const EncodedSentence* const> batch, const LossConfig& config, model::Mode mode,
                     Rng* rng) {
  if (batch.empty()) throw std::invalid_argument("batch_loss: empty batch");
  if (config.kind == LossKind::kBinary && head == nullptr) {
    throw std::invalid_argument("batch_loss: binary loss needs a BinaryHead");
  }
  std::vector<TokenIds> sentences;
  sentences.reserve(batch.size());
  for (const auto* s : batch) sentences.push_back(s->tokens);
  const auto fw = model::forward_batch(g, lm, sentences, mode, rng);

  std::vector<Cell> lm_cells;
  std::vector<Cell> correct_cells, negative_cells;
  std::vector<std::size_t> hidden_rows;
  std::vector<Cell> label_cells;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto& s = *batch[b];
    for (std::size_t t = 0; t <= s.tokens.size(); ++t) {
      lm_cells.push_back({fw.row(t, b), t < s.tokens.size() ? s.tokens[t] : Vocabulary::kEos});
    }
    for (const auto& tg : s.targets) {
      const std::size_t row = fw.row(tg.position, b);
      for (TokenId neg : tg.negatives) {
        correct_cells.push_back({row, tg.correct});
        negative_cells.push_back({row, neg});
      }
      label_cells.push_back({hidden_rows.size(), label_index(tg.number)});
      hidden_rows.push_back(row);
    }
  }
  const double n = static_cast<double>(lm_cells.size());
  BatchLoss out;
  out.tokens = lm_cells.size();
  Var lm_loss = num::scale(num::sum(num::gather(fw.log_probs, lm_cells)), -1.0 / n);
  out.lm = lm_loss.scalar();
  out.total = lm_loss;

  Var aux;
  switch (config.kind) {
    case LossKind::kNone:
    case LossKind::kSentenceMargin: return out;
    case LossKind::kBinary: {
      if (hidden_rows.empty()) return out;
      auto& p = head->params();
      Var h = num::gather_rows(fw.hidden, hidden_rows);
      Var logits = num::add_row(num::matmul(h, g.parameter(p.get("binary.weight"))), g.parameter(p.get("binary.bias")));
      aux = num::scale(num::sum(num::gather(num::log_softmax(logits), label_cells)), -1.0 / n);
      break;
    }
    case LossKind::kUnlikelihood: {
      if (negative_cells.empty()) return out;
      aux = num::scale(num::sum(num::log1m_exp(num::gather(fw.log_probs, negative_cells))), config.alpha / n);
      break;
    }
    case LossKind::kTokenMargin: {
      if (negative_cells.empty()) return out;
      Var gap = num::sub(num::gather(fw.log_probs, correct_cells), num::gather(fw.log_probs, negative_cells));
      Var hinge = num::hinge(num::add_scalar(num::scale(gap, -1.0), config.delta));
      aux = num::scale(num::sum(hinge), config.alpha / n);
      break;
    }
  }
  out.aux = aux.scalar();
  out.total = total_loss(lm_loss, aux, config);
  return out;
}

std::vector<MarginPair> enumerate_margin_pairs(std::span<const EncodedSentence> corpus) {
  std::vector<MarginPair> pairs;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    for (std::size_t t = 0; t < corpus[i].targets.size(); ++t) {
      for (std::size_t k = 0; k < corpus[i].targets[t].negatives.size(); ++k) pairs.push_back({i, t, k});
    }
  }
  return pairs;
}

TokenIds negative_sentence(const EncodedSentence& s, const MarginPair& p) {
  TokenIds out = s.tokens;
  const auto& t = s.targets.at(p.target);
  out.at(t.position) = t.negatives.at(p.negative);
  return out;
}

BatchLoss margin_batch_loss(num::Graph& g, model::LanguageModel& lm, std::span<const EncodedSentence> corpus,
                            std::span<const MarginPair> pairs, const LossConfig& config, model::Mode mode, Rng* rng) {
  if (pairs.empty()) throw std::invalid_argument("margin_batch_loss: no pairs");
  const std::size_t P = pairs.size();
  std::vector<TokenIds> sentences;
  sentences.reserve(2 * P);
  for (const auto& p : pairs) sentences.push_back(corpus[p.sentence].tokens);
  for (const auto& p : pairs) sentences.push_back(negative_sentence(corpus[p.sentence], p));
  const auto fw = model::forward_batch(g, lm, sentences, mode, rng);

  std::vector<Cell> cells;
  std::vector<std::size_t> groups;
  std::size_t positive_tokens = 0;
  for (std::size_t b = 0; b < sentences.size(); ++b) {
    const auto& s = sentences[b];
    for (std::size_t t = 0; t <= s.size(); ++t) {
      cells.push_back({fw.row(t, b), t < s.size() ? s[t] : Vocabulary::kEos});
      groups.push_back(b);
    }
    if (b < P) positive_tokens += s.size() + 1;
  }
  Var logp = num::gather_sum(fw.log_probs, cells, groups, sentences.size());
  Var gap = num::sub(num::row_block(logp, 0, P), num::row_block(logp, P, P));
  Var hinge = num::hinge(num::add_scalar(num::scale(gap, -1.0), config.delta));
  Var aux = num::scale(num::sum(hinge), 1.0 / static_cast<double>(positive_tokens));
  BatchLoss out;
  out.tokens = positive_tokens;
  out.aux = aux.scalar();
  out.total = num::scale(aux, config.beta);
  return out;
}

}  // namespace negexlm::loss
