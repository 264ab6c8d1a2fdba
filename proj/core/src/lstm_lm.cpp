#include "negexlm/lstm_lm.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <sstream>
#include <stdexcept>

#include "negexlm/text_io.hpp"

namespace negexlm::model {

using num::Matrix;
using num::Tensor;
using num::Var;

void LmConfig::validate() const {
  if (num_layers == 0) throw std::invalid_argument("num_layers must be positive");
  if (embed_dim == 0 || hidden_dim == 0) throw std::invalid_argument("embedding and hidden sizes must be positive");
  if (vocab_size < 3) throw std::invalid_argument("vocab_size must cover the reserved tokens");
  for (double r : {dropout_embed, dropout_hidden}) {
    if (!(r >= 0.0 && r < 1.0)) throw std::invalid_argument("dropout rates must lie in [0, 1)");
  }
}

namespace {

std::string layer_name(std::size_t layer, const char* what) {
  return "lstm." + std::to_string(layer) + "." + what;
}

}  // namespace

LanguageModel::LanguageModel(LmConfig config) : config_(config) {
  config_.validate();
  const std::size_t V = config_.vocab_size, E = config_.embed_dim, H = config_.hidden_dim;
  params_.add("embedding", Tensor({V, E}));
  for (std::size_t l = 0; l < config_.num_layers; ++l) {
    const std::size_t in = l == 0 ? E : H;
    params_.add(layer_name(l, "w_input"), Tensor({in, 4 * H}));
    params_.add(layer_name(l, "w_hidden"), Tensor({H, 4 * H}));
    params_.add(layer_name(l, "bias"), Tensor({4 * H}));
  }
  if (config_.tie_embeddings) {
    params_.add("output.projection", Tensor({H, E}));
  } else {
    params_.add("output.weight", Tensor({H, V}));
  }
  params_.add("output.bias", Tensor({V}));
}

void LanguageModel::initialize(Rng& rng, double range) {
  const std::size_t H = config_.hidden_dim;
  for (auto& p : params_) {
    auto values = p.value.values();
    const bool is_bias = p.name.ends_with("bias");
    for (std::size_t i = 0; i < values.size(); ++i) {
      values[i] = is_bias ? 0.0 : rng.uniform(-range, range);
    }
    if (p.name.starts_with("lstm.") && is_bias) {
      for (std::size_t i = H; i < 2 * H; ++i) values[i] = 1.0;
    }
  }
}

BatchForward forward_batch(num::Graph& g, LanguageModel& model, std::span<const TokenIds> sentences, Mode mode,
                           Rng* rng) {
  const LmConfig& cfg = model.config();
  if (sentences.empty()) throw std::invalid_argument("forward_batch: empty batch");
  const bool training = mode == Mode::kTrain;
  if (training && rng == nullptr) throw std::invalid_argument("forward_batch: training mode requires an rng");
  Rng unused_rng(0);
  Rng& drop_rng = rng != nullptr ? *rng : unused_rng;

  const std::size_t B = sentences.size();
  std::size_t max_len = 0;
  for (const auto& s : sentences) {
    max_len = std::max(max_len, s.size());
    for (TokenId t : s) {
      if (t >= cfg.vocab_size) throw std::out_of_range("token id " + std::to_string(t) + " outside vocabulary");
    }
  }
  const std::size_t T = max_len + 1;

  std::vector<std::size_t> input_ids(T * B);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t b = 0; b < B; ++b) {
      const auto& s = sentences[b];
      input_ids[t * B + b] = t == 0 ? Vocabulary::kBos : (t - 1 < s.size() ? s[t - 1] : Vocabulary::kEos);
    }
  }

  auto& params = model.params();
  Var embedding = g.parameter(params.get("embedding"));
  Var x = num::dropout(num::gather_rows(embedding, input_ids), cfg.dropout_embed, drop_rng, training);

  for (std::size_t l = 0; l < cfg.num_layers; ++l) {
    Var w_input = g.parameter(params.get(layer_name(l, "w_input")));
    Var w_hidden = g.parameter(params.get(layer_name(l, "w_hidden")));
    Var bias = g.parameter(params.get(layer_name(l, "bias")));
    Var projected = num::add_row(num::matmul(x, w_input), bias);
    x = num::lstm_sequence(projected, w_hidden, B);
    x = num::dropout(x, cfg.dropout_hidden, drop_rng, training);
  }

  Var logits;
  if (cfg.tie_embeddings) {
    Var projected = num::matmul(x, g.parameter(params.get("output.projection")));
    logits = num::matmul_nt(projected, embedding);
  } else {
    logits = num::matmul(x, g.parameter(params.get("output.weight")));
  }
  logits = num::add_row(logits, g.parameter(params.get("output.bias")));

  BatchForward out;
  out.log_probs = num::log_softmax(logits);
  out.hidden = x;
  out.batch = B;
  out.steps = T;
  return out;
}

std::vector<Tensor> forward(LanguageModel& model, std::span<const TokenId> tokens, Mode mode, Rng* rng) {
  num::Graph g(false);
  const TokenIds sentence(tokens.begin(), tokens.end());
  auto out = forward_batch(g, model, std::span<const TokenIds>(&sentence, 1), mode, rng);
  const Matrix& lp = out.log_probs.value();
  std::vector<Tensor> result;
  result.reserve(out.steps);
  for (std::size_t t = 0; t < out.steps; ++t) {
    result.push_back(Tensor::vector(std::vector<double>(lp.row(static_cast<Eigen::Index>(t)).begin(),
                                                        lp.row(static_cast<Eigen::Index>(t)).end())));
  }
  return result;
}

std::vector<Tensor> hidden_states(LanguageModel& model, std::span<const TokenId> tokens) {
  num::Graph g(false);
  const TokenIds sentence(tokens.begin(), tokens.end());
  auto out = forward_batch(g, model, std::span<const TokenIds>(&sentence, 1), Mode::kEval, nullptr);
  const Matrix& hs = out.hidden.value();
  std::vector<Tensor> result;
  result.reserve(out.steps);
  for (std::size_t t = 0; t < out.steps; ++t) {
    const auto row = hs.row(static_cast<Eigen::Index>(t));
    result.push_back(Tensor::vector(std::vector<double>(row.begin(), row.end())));
  }
  return result;
}

double sentence_logprob(LanguageModel& model, std::span<const TokenId> tokens) {
  const TokenIds sentence(tokens.begin(), tokens.end());
  return sentence_logprobs(model, std::span<const TokenIds>(&sentence, 1)).front();
}

std::vector<double> sentence_logprobs(LanguageModel& model, std::span<const TokenIds> sentences,
                                      std::size_t batch_size) {
  if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
  std::vector<double> scores(sentences.size(), 0.0);
  // Sort by length so padded batches stay tight; scores go back to input order.
  std::vector<std::size_t> order(sentences.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sentences[a].size() < sentences[b].size(); });
  std::vector<TokenIds> batch;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t end = std::min(order.size(), start + batch_size);
    batch.clear();
    for (std::size_t k = start; k < end; ++k) batch.push_back(sentences[order[k]]);
    num::Graph g(false);
    auto out = forward_batch(g, model, batch, Mode::kEval, nullptr);
    const Matrix& lp = out.log_probs.value();
    for (std::size_t b = 0; b < batch.size(); ++b) {
      const auto& s = batch[b];
      double total = 0.0;
      for (std::size_t t = 0; t <= s.size(); ++t) {
        const TokenId target = t < s.size() ? s[t] : Vocabulary::kEos;
        total += lp(static_cast<Eigen::Index>(out.row(t, b)), static_cast<Eigen::Index>(target));
      }
      scores[order[start + b]] = total;
    }
  }
  return scores;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

constexpr std::string_view kMagic = "NEGEXLM1";

class Writer {
 public:
  void bytes(std::string_view s) { out_.append(s); }
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s);
  }
  std::string take() { return std::move(out_); }

 private:
  void raw(const void* p, std::size_t n) { out_.append(static_cast<const char*>(p), n); }
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}
  std::string_view bytes(std::size_t n) {
    if (pos_ + n > data_.size()) throw std::runtime_error("checkpoint truncated");
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint32_t u32() { return pod<std::uint32_t>(); }
  std::uint64_t u64() { return pod<std::uint64_t>(); }
  double f64() { return pod<double>(); }
  std::string str() { return std::string(bytes(u32())); }
  bool done() const { return pos_ == data_.size(); }

 private:
  template <typename T>
  T pod() {
    T v;
    std::memcpy(&v, bytes(sizeof v).data(), sizeof v);
    return v;
  }
  std::string_view data_;
  std::size_t pos_ = 0;
};

std::string config_text(const LmConfig& c) {
  std::ostringstream os;
  os.precision(17);
  os << "num_layers=" << c.num_layers << '\n'
     << "embed_dim=" << c.embed_dim << '\n'
     << "hidden_dim=" << c.hidden_dim << '\n'
     << "vocab_size=" << c.vocab_size << '\n'
     << "dropout_embed=" << c.dropout_embed << '\n'
     << "dropout_hidden=" << c.dropout_hidden << '\n'
     << "tie_embeddings=" << (c.tie_embeddings ? 1 : 0) << '\n';
  return os.str();
}

LmConfig parse_config_text(std::string_view text) {
  LmConfig c;
  for (auto line : split_lines(text)) {
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw std::runtime_error("malformed checkpoint config line");
    const std::string key(line.substr(0, eq));
    const std::string value(line.substr(eq + 1));
    if (key == "num_layers") c.num_layers = std::stoul(value);
    else if (key == "embed_dim") c.embed_dim = std::stoul(value);
    else if (key == "hidden_dim") c.hidden_dim = std::stoul(value);
    else if (key == "vocab_size") c.vocab_size = std::stoul(value);
    else if (key == "dropout_embed") c.dropout_embed = std::stod(value);
    else if (key == "dropout_hidden") c.dropout_hidden = std::stod(value);
    else if (key == "tie_embeddings") c.tie_embeddings = value == "1";
    else throw std::runtime_error("unknown checkpoint config key: " + key);
  }
  return c;
}

}  // namespace

std::string serialize_checkpoint(const LanguageModel& model, const Vocabulary& vocab) {
  if (vocab.size() != model.config().vocab_size) {
    throw std::invalid_argument("vocabulary size does not match the model");
  }
  Writer w;
  w.bytes(kMagic);
  w.str(config_text(model.config()));
  w.u32(static_cast<std::uint32_t>(vocab.min_freq()));
  w.u32(static_cast<std::uint32_t>(vocab.entries().size()));
  for (const auto& t : vocab.entries()) w.str(t);
  w.u32(static_cast<std::uint32_t>(model.params().size()));
  for (const auto& p : model.params()) {
    w.str(p.name);
    w.u32(static_cast<std::uint32_t>(p.value.rank()));
    for (auto d : p.value.shape()) w.u64(d);
    for (double v : p.value.values()) w.f64(v);
  }
  return w.take();
}

void save_checkpoint(const std::filesystem::path& path, const LanguageModel& model, const Vocabulary& vocab) {
  write_file(path, serialize_checkpoint(model, vocab));
}

Checkpoint parse_checkpoint(std::string_view bytes) {
  Reader r(bytes);
  if (r.bytes(kMagic.size()) != kMagic) throw std::runtime_error("not a NEGEXLM1 checkpoint");
  const LmConfig cfg = parse_config_text(r.str());
  const std::size_t min_freq = r.u32();
  const std::uint32_t n_tokens = r.u32();
  std::vector<std::string> tokens;
  tokens.reserve(n_tokens);
  for (std::uint32_t i = 0; i < n_tokens; ++i) tokens.push_back(r.str());
  Checkpoint ck{LanguageModel(cfg), Vocabulary::from_tokens(tokens, min_freq)};
  if (ck.vocab.size() != cfg.vocab_size) throw std::runtime_error("checkpoint vocabulary size mismatch");
  const std::uint32_t n_params = r.u32();
  if (n_params != ck.model.params().size()) throw std::runtime_error("checkpoint parameter count mismatch");
  for (std::uint32_t i = 0; i < n_params; ++i) {
    const std::string name = r.str();
    const std::uint32_t rank = r.u32();
    num::Shape shape;
    for (std::uint32_t k = 0; k < rank; ++k) shape.push_back(r.u64());
    auto& param = ck.model.params().get(name);
    if (param.value.shape() != shape) {
      throw std::runtime_error("checkpoint shape mismatch for " + name + ": " + num::shape_string(shape));
    }
    for (double& v : param.value.values()) v = r.f64();
  }
  if (!r.done()) throw std::runtime_error("trailing bytes in checkpoint");
  return ck;
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return parse_checkpoint(read_file(path)); }

}  // namespace negexlm::model
