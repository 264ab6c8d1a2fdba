#include "negexlm/trainer.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <mutex>
#include <stdexcept>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace negexlm::train {

void TrainConfig::validate() const {
  if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw std::invalid_argument("lr must be positive");
  if (!(weight_decay >= 0.0)) throw std::invalid_argument("weight_decay must be nonnegative");
  if (!(anneal_factor > 0.0 && anneal_factor < 1.0)) throw std::invalid_argument("anneal_factor must lie in (0, 1)");
  if (!(min_lr > 0.0)) throw std::invalid_argument("min_lr must be positive");
  if (check_interval == 0) throw std::invalid_argument("check_interval must be positive");
  if (max_epochs == 0) throw std::invalid_argument("max_epochs must be positive");
  if (!(clip_norm >= 0.0)) throw std::invalid_argument("clip_norm must be nonnegative");
}

double perplexity(model::LanguageModel& lm, std::span<const TokenIds> corpus) {
  if (corpus.empty()) throw std::invalid_argument("perplexity: empty corpus");
  const auto scores = model::sentence_logprobs(lm, corpus);
  double nll = 0.0;
  std::size_t tokens = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    nll -= scores[i];
    tokens += corpus[i].size() + 1;
  }
  return std::exp(nll / static_cast<double>(tokens));
}

std::string trainlog_csv(const TrainLog& log, std::span<const std::string> comments) {
  std::string out;
  for (const auto& c : comments) out += "# " + c + "\n";
  out += "step,lr,lm_loss,aux_loss,dev_ppl\n";
  char buf[160];
  for (const auto& r : log.records) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g\n", r.step, r.lr, r.lm_loss, r.aux_loss, r.dev_ppl);
    out += buf;
  }
  return out;
}

std::vector<std::vector<loss::MarginPair>> schedule_margin_batches(std::span<const loss::MarginPair> pairs,
                                                                   std::size_t lm_batches, std::size_t batch_size,
                                                                   Rng& rng) {
  std::vector<std::vector<loss::MarginPair>> out;
  if (pairs.empty()) return out;
  const std::size_t per = std::max<std::size_t>(1, batch_size / 2);
  const std::size_t cap = lm_batches / 2;
  std::vector<loss::MarginPair> shuffled(pairs.begin(), pairs.end());
  rng.shuffle(std::span<loss::MarginPair>(shuffled));
  for (std::size_t start = 0; start < shuffled.size() && out.size() < cap; start += per) {
    const std::size_t end = std::min(shuffled.size(), start + per);
    out.emplace_back(shuffled.begin() + static_cast<std::ptrdiff_t>(start),
                     shuffled.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

std::vector<std::vector<std::size_t>> make_batches(std::span<const loss::EncodedSentence> corpus,
                                                   std::size_t batch_size, Rng& rng) {
  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(std::span<std::size_t>(order));
  const std::size_t pool = 50 * batch_size;
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < order.size(); start += pool) {
    const auto first = order.begin() + static_cast<std::ptrdiff_t>(start);
    const auto last = order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), start + pool));
    std::stable_sort(first, last, [&](std::size_t a, std::size_t b) {
      return corpus[a].tokens.size() < corpus[b].tokens.size();
    });
    for (auto it = first; it < last; it += static_cast<std::ptrdiff_t>(std::min<std::size_t>(batch_size, last - it))) {
      batches.emplace_back(it, it + static_cast<std::ptrdiff_t>(std::min<std::size_t>(batch_size, last - it)));
    }
  }
  rng.shuffle(std::span<std::vector<std::size_t>>(batches));
  return batches;
}

namespace {

// Graph buffers are allocated and freed every step; keeping freed memory in
// the heap instead of returning it to the kernel avoids page-fault churn.
void tune_allocator() {
#if defined(__GLIBC__)
  static std::once_flag once;
  std::call_once(once, [] {
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
    mallopt(M_TOP_PAD, 64 << 20);
  });
#endif
}

struct Snapshot {
  num::ParameterStore lm;
  num::ParameterStore head;
};

void restore(const num::ParameterStore& from, num::ParameterStore& to) {
  for (auto& p : to) p.value = from.get(p.name).value;
}

void apply_update(num::ParameterStore& params, num::Gradients& grads, double lr, double wd) {
  num::Gradients mine;
  for (const auto& p : params) {
    if (auto it = grads.find(p.name); it != grads.end()) mine.emplace(p.name, std::move(it->second));
  }
  num::sgd_step(params, mine, lr, wd);
}

}  // namespace

TrainLog train(model::LanguageModel& lm, loss::BinaryHead* head, std::span<const loss::EncodedSentence> train_set,
               std::span<const TokenIds> dev_set, const loss::LossConfig& loss_config, const TrainConfig& config) {
  config.validate();
  loss_config.validate();
  if (train_set.empty()) throw std::invalid_argument("train: empty training set");
  if (dev_set.empty()) throw std::invalid_argument("train: empty dev set");
  if (loss_config.kind == loss::LossKind::kBinary && head == nullptr) {
    throw std::invalid_argument("train: binary loss needs a BinaryHead");
  }
  const std::size_t V = lm.config().vocab_size;
  for (const auto& s : train_set) {
    for (TokenId t : s.tokens) {
      if (t >= V) throw std::invalid_argument("train: corpus token outside the model vocabulary");
    }
  }
  tune_allocator();

  Rng rng(config.seed);
  Rng batch_rng = rng.split();
  Rng dropout_rng = rng.split();
  Rng margin_rng = rng.split();

  const bool use_head = loss_config.kind == loss::LossKind::kBinary;
  const bool sentence_margin = loss_config.kind == loss::LossKind::kSentenceMargin;
  const auto pairs = sentence_margin ? loss::enumerate_margin_pairs(train_set) : std::vector<loss::MarginPair>{};

  TrainLog log;
  double lr = config.lr;
  Snapshot best{lm.params(), use_head ? head->params() : num::ParameterStore{}};
  log.best_dev_ppl = perplexity(lm, dev_set);
  log.best_step = 0;

  std::size_t step = 0;
  double lm_sum = 0.0, aux_sum = 0.0;
  std::size_t lm_count = 0, aux_count = 0;

  auto sgd = [&](num::Graph& g, num::Var total) {
    auto grads = g.backward(total);
    if (config.clip_norm > 0.0) num::clip_gradients(grads, config.clip_norm);
    apply_update(lm.params(), grads, lr, config.weight_decay);
    if (use_head) apply_update(head->params(), grads, lr, config.weight_decay);
  };

  auto check = [&]() {
    TrainRecord r;
    r.step = step;
    r.lr = lr;
    r.lm_loss = lm_count ? lm_sum / static_cast<double>(lm_count) : 0.0;
    r.aux_loss = aux_count ? aux_sum / static_cast<double>(aux_count) : 0.0;
    r.dev_ppl = perplexity(lm, dev_set);
    lm_sum = aux_sum = 0.0;
    lm_count = aux_count = 0;
    log.records.push_back(r);
    if (!std::isfinite(r.dev_ppl)) return false;
    if (r.dev_ppl < log.best_dev_ppl) {
      log.best_dev_ppl = r.dev_ppl;
      log.best_step = step;
      best.lm = lm.params();
      if (use_head) best.head = head->params();
    } else {
      lr = std::max(config.min_lr, lr * config.anneal_factor);
    }
    return true;
  };

  auto abort_with = [&](std::string what) {
    log.aborted = true;
    log.diagnostic = std::move(what);
  };

  for (std::size_t epoch = 0; epoch < config.max_epochs && !log.aborted; ++epoch) {
    const auto batches = make_batches(train_set, config.batch_size, batch_rng);
    const auto margin_batches =
        sentence_margin ? schedule_margin_batches(pairs, batches.size(), config.batch_size, margin_rng)
                        : std::vector<std::vector<loss::MarginPair>>{};
    std::size_t next_margin = 0;
    for (std::size_t bi = 0; bi < batches.size(); ++bi) {
      std::vector<const loss::EncodedSentence*> batch;
      batch.reserve(batches[bi].size());
      for (std::size_t idx : batches[bi]) batch.push_back(&train_set[idx]);
      {
        num::Graph g;
        g.register_parameters(lm.params());
        if (use_head) g.register_parameters(head->params());
        auto bl = loss::batch_loss(g, lm, head, batch, loss_config, model::Mode::kTrain, &dropout_rng);
        const double total = bl.total.scalar();
        if (!std::isfinite(total)) {
          abort_with("non-finite loss at step " + std::to_string(step + 1));
          break;
        }
        sgd(g, bl.total);
        lm_sum += bl.lm;
        ++lm_count;
        if (loss_config.kind != loss::LossKind::kNone && !sentence_margin) {
          aux_sum += bl.aux;
          ++aux_count;
        }
      }
      ++step;
      // One pair batch after every second LM batch.
      if (sentence_margin && bi % 2 == 1 && next_margin < margin_batches.size()) {
        num::Graph g;
        g.register_parameters(lm.params());
        auto ml = loss::margin_batch_loss(g, lm, train_set, margin_batches[next_margin++], loss_config,
                                          model::Mode::kTrain, &dropout_rng);
        if (!std::isfinite(ml.total.scalar())) {
          abort_with("non-finite margin loss at step " + std::to_string(step));
          break;
        }
        sgd(g, ml.total);
        aux_sum += ml.aux;
        ++aux_count;
      }
      if (step % config.check_interval == 0 && !check()) {
        abort_with("non-finite dev perplexity at step " + std::to_string(step));
        break;
      }
    }
  }
  if (!log.aborted && (log.records.empty() || log.records.back().step != step)) {
    if (!check()) abort_with("non-finite dev perplexity at step " + std::to_string(step));
  }
  restore(best.lm, lm.params());
  if (use_head) restore(best.head, head->params());
  return log;
}

}  // namespace negexlm::train
