#include "negexlm_cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <set>

#include "negexlm/annotation.hpp"
#include "negexlm/text_io.hpp"
#include "negexlm_cli/experiment.hpp"

namespace negexlm::cli {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

double parse_double(std::string_view key, std::string_view s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end || !std::isfinite(v)) {
    throw ConfigError(std::string(key) + ": expected a number, got '" + std::string(s) + "'");
  }
  return v;
}

std::uint64_t parse_uint(std::string_view key, std::string_view s) {
  std::uint64_t v = 0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) {
    throw ConfigError(std::string(key) + ": expected a nonnegative integer, got '" + std::string(s) + "'");
  }
  return v;
}

bool parse_bool(std::string_view key, std::string_view s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError(std::string(key) + ": expected true or false, got '" + std::string(s) + "'");
}

template <class T, class F>
std::vector<T> parse_list(std::string_view s, F&& one) {
  std::vector<T> out;
  for (const auto& piece : split(s, ',')) {
    const auto t = trim(piece);
    if (!t.empty()) out.push_back(one(t));
  }
  return out;
}

template <class T, class F>
std::string fmt_list(const std::vector<T>& v, F&& one) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += one(v[i]);
  }
  return out;
}

struct Field {
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, std::string_view key, std::string_view value)> set;
};

template <class M>
Field double_field(M member) {
  return {[member](const ExperimentConfig& c) { return fmt_double(member(c)); },
          [member](ExperimentConfig& c, std::string_view k, std::string_view v) { member(c) = parse_double(k, v); }};
}

template <class M>
Field size_field(M member) {
  return {[member](const ExperimentConfig& c) { return std::to_string(member(c)); },
          [member](ExperimentConfig& c, std::string_view k, std::string_view v) {
            member(c) = static_cast<std::remove_reference_t<decltype(member(c))>>(parse_uint(k, v));
          }};
}

template <class M>
Field bool_field(M member) {
  return {[member](const ExperimentConfig& c) {
            return std::string(member(c) ? "true" : "false");
          },
          [member](ExperimentConfig& c, std::string_view k, std::string_view v) { member(c) = parse_bool(k, v); }};
}

template <class M>
Field string_field(M member) {
  return {[member](const ExperimentConfig& c) { return std::string(member(c)); },
          [member](ExperimentConfig& c, std::string_view, std::string_view v) { member(c) = std::string(v); }};
}

template <class M>
Field path_field(M member) {
  return {[member](const ExperimentConfig& c) { return member(c).string(); },
          [member](ExperimentConfig& c, std::string_view, std::string_view v) { member(c) = std::string(v); }};
}

#define NX_REF(expr) [](auto& c) -> auto& { return expr; }

const std::map<std::string, Field, std::less<>>& fields() {
  static const auto table = [] {
    std::map<std::string, Field, std::less<>> t;
    t["out_dir"] = path_field(NX_REF(c.out_dir));
    t["data_dir"] = path_field(NX_REF(c.data_dir));
    t["suite_path"] = path_field(NX_REF(c.suite_path));
    t["seeds"] = {[](const ExperimentConfig& c) {
                    return fmt_list(c.seeds, [](std::uint64_t s) { return std::to_string(s); });
                  },
                  [](ExperimentConfig& c, std::string_view k, std::string_view v) {
                    c.seeds = parse_list<std::uint64_t>(v, [&](std::string_view s) { return parse_uint(k, s); });
                  }};
    t["threads"] = size_field(NX_REF(c.threads));

    t["corpus.num_sentences"] = size_field(NX_REF(c.corpus.num_sentences));
    t["corpus.seed"] = size_field(NX_REF(c.corpus.seed));
    t["corpus.disjoint_lexicon"] = bool_field(NX_REF(c.corpus.disjoint_lexicon));
    t["corpus.max_length"] = size_field(NX_REF(c.corpus.max_length));
    t["corpus.min_freq"] = size_field(NX_REF(c.min_freq));
    t["corpus.train_fraction"] = double_field(NX_REF(c.train_fraction));
    t["corpus.dev_fraction"] = double_field(NX_REF(c.dev_fraction));
    t["corpus.test_fraction"] = double_field(NX_REF(c.test_fraction));
    for (const auto& tag : negex::construction_tags()) {
      if (tag == "none") continue;
      t["corpus.mix." + tag] = {[tag](const ExperimentConfig& c) {
                                  auto it = c.corpus.mix.find(tag);
                                  return fmt_double(it == c.corpus.mix.end() ? 0.0 : it->second);
                                },
                                [tag](ExperimentConfig& c, std::string_view k, std::string_view v) {
                                  c.corpus.mix[tag] = parse_double(k, v);
                                }};
    }

    t["model.num_layers"] = size_field(NX_REF(c.model.num_layers));
    t["model.embed_dim"] = size_field(NX_REF(c.model.embed_dim));
    t["model.hidden_dim"] = size_field(NX_REF(c.model.hidden_dim));
    t["model.dropout_embed"] = double_field(NX_REF(c.model.dropout_embed));
    t["model.dropout_hidden"] = double_field(NX_REF(c.model.dropout_hidden));
    t["model.tie_embeddings"] = bool_field(NX_REF(c.model.tie_embeddings));

    t["loss.kind"] = {[](const ExperimentConfig& c) { return std::string(loss::loss_kind_name(c.loss.kind)); },
                      [](ExperimentConfig& c, std::string_view k, std::string_view v) {
                        try {
                          c.loss.kind = loss::parse_loss_kind(v);
                        } catch (const std::invalid_argument& e) {
                          throw ConfigError(std::string(k) + ": " + e.what());
                        }
                      }};
    t["loss.alpha"] = double_field(NX_REF(c.loss.alpha));
    t["loss.beta"] = double_field(NX_REF(c.loss.beta));
    t["loss.delta"] = double_field(NX_REF(c.loss.delta));

    t["train.batch_size"] = size_field(NX_REF(c.train.batch_size));
    t["train.lr"] = double_field(NX_REF(c.train.lr));
    t["train.weight_decay"] = double_field(NX_REF(c.train.weight_decay));
    t["train.anneal_factor"] = double_field(NX_REF(c.train.anneal_factor));
    t["train.min_lr"] = double_field(NX_REF(c.train.min_lr));
    t["train.check_interval"] = size_field(NX_REF(c.train.check_interval));
    t["train.max_epochs"] = size_field(NX_REF(c.train.max_epochs));
    t["train.clip_norm"] = double_field(NX_REF(c.train.clip_norm));

    t["suite.per_construction"] = size_field(NX_REF(c.suite_per_construction));
    t["suite.seed"] = size_field(NX_REF(c.suite_seed));

    t["sweep.deltas"] = {[](const ExperimentConfig& c) { return fmt_list(c.sweep_deltas, fmt_double); },
                         [](ExperimentConfig& c, std::string_view k, std::string_view v) {
                           c.sweep_deltas = parse_list<double>(v, [&](std::string_view s) { return parse_double(k, s); });
                         }};
    t["augment.multipliers"] = {[](const ExperimentConfig& c) { return fmt_list(c.augment_multipliers, fmt_double); },
                                [](ExperimentConfig& c, std::string_view k, std::string_view v) {
                                  c.augment_multipliers =
                                      parse_list<double>(v, [&](std::string_view s) { return parse_double(k, s); });
                                }};
    t["ablate.mode"] = string_field(NX_REF(c.ablate_mode));
    t["ablate.target"] = string_field(NX_REF(c.ablate_target));
    return t;
  }();
  return table;
}

#undef NX_REF

}  // namespace

ExperimentConfig::ExperimentConfig() {
  // Desk-scale defaults used by the acceptance suite.
  corpus.num_sentences = 50000;
  corpus.disjoint_lexicon = true;
  train.batch_size = 32;
  train.lr = 2.0;
  train.clip_norm = 5.0;
  train.max_epochs = 5;
  train.check_interval = 500;
}

std::vector<std::string> ExperimentConfig::keys() {
  std::vector<std::string> out;
  for (const auto& [k, f] : fields()) out.push_back(k);
  return out;
}

void ExperimentConfig::set(std::string_view key, std::string_view value) {
  auto it = fields().find(key);
  if (it == fields().end()) throw ConfigError("unknown config key '" + std::string(key) + "'");
  it->second.set(*this, key, value);
}

std::string ExperimentConfig::resolved() const {
  std::string out;
  for (const auto& [k, f] : fields()) out += k + " = " + f.get(*this) + "\n";
  return out;
}

std::string ExperimentConfig::hash() const { return fnv1a_hex(resolved()); }

void ExperimentConfig::validate() const {
  try {
    corpus.validate();
    loss.validate();
    train.validate();
    model::LmConfig m = model;
    m.vocab_size = 16;
    m.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (seeds.empty()) throw ConfigError("seeds must not be empty");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw ConfigError("seeds must be distinct");
  }
  if (threads == 0) throw ConfigError("threads must be positive");
  if (suite_per_construction == 0) throw ConfigError("suite.per_construction must be positive");
  if (min_freq == 0) throw ConfigError("corpus.min_freq must be positive");
  for (double f : {train_fraction, dev_fraction, test_fraction}) {
    if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("split fractions must lie in [0, 1]");
  }
  if (std::abs(train_fraction + dev_fraction + test_fraction - 1.0) > 1e-9) {
    throw ConfigError("split fractions must sum to 1");
  }
  if (train_fraction <= 0.0 || dev_fraction <= 0.0) throw ConfigError("train and dev fractions must be positive");
  for (double d : sweep_deltas) {
    if (d < 0.0) throw ConfigError("sweep.deltas must be nonnegative");
  }
  for (double m : augment_multipliers) {
    if (m < 1.0) throw ConfigError("augment.multipliers must be at least 1");
  }
  if (ablate_mode != "token" && ablate_mode != "pattern") throw ConfigError("ablate.mode must be token or pattern");
  if (ablate_mode == "pattern") pattern_ablation_tags(ablate_target);
}

void apply_config_text(ExperimentConfig& config, std::string_view text, std::string_view source) {
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  for (auto line : split_lines(text)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto where = std::string(source) + ":" + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + "expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + "empty key");
    if (!seen.insert(std::string(key)).second) throw ConfigError(where + "duplicate key '" + std::string(key) + "'");
    try {
      config.set(key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  ExperimentConfig config;
  apply_config_text(config, read_file(path), path.string());
  return config;
}

}  // namespace negexlm::cli
