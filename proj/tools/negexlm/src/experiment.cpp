#include "negexlm_cli/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <stdexcept>

#include "negexlm/corpus.hpp"
#include "negexlm/inflect.hpp"
#include "negexlm/lexicon.hpp"
#include "negexlm/losses.hpp"
#include "negexlm/text_io.hpp"

namespace negexlm::cli {

namespace fs = std::filesystem;

Dataset generate_dataset(const ExperimentConfig& config) {
  const negex::Inflector inflector;
  const auto all = corpus::generate_synthetic(config.corpus, corpus::Lexicon::builtin(), inflector);
  auto parts = corpus::split(all, config.train_fraction, config.dev_fraction, config.test_fraction, config.corpus.seed);
  Dataset d;
  d.vocab = corpus::build_vocab(parts.train, config.min_freq);
  d.train = std::move(parts.train);
  d.dev = std::move(parts.dev);
  d.test = std::move(parts.test);
  return d;
}

void save_dataset(const fs::path& dir, const Dataset& data) {
  fs::create_directories(dir);
  negex::save_corpus(dir / "train.tsv", data.train);
  negex::save_corpus(dir / "dev.tsv", data.dev);
  negex::save_corpus(dir / "test.tsv", data.test);
  data.vocab.save(dir / "vocab.txt");
}

Dataset load_dataset(const fs::path& dir) {
  Dataset d;
  d.train = negex::load_corpus(dir / "train.tsv");
  d.dev = negex::load_corpus(dir / "dev.tsv");
  d.test = negex::load_corpus(dir / "test.tsv");
  d.vocab = Vocabulary::load(dir / "vocab.txt");
  return d;
}

std::vector<syneval::TestCase> make_suite(const ExperimentConfig& config) {
  if (!config.suite_path.empty()) return syneval::load_suite(config.suite_path);
  return syneval::generate_suite(corpus::Lexicon::builtin(), syneval::suite_constructions(),
                                 config.suite_per_construction, config.suite_seed);
}

const std::set<std::string>& token_ablation_lemmas() {
  static const std::set<std::string> lemmas = {"swim",  "smile", "laugh", "enjoy", "hate",  "bring", "interest",
                                               "like",  "write", "admire", "love", "know",  "be"};
  return lemmas;
}

std::vector<std::string> pattern_ablation_tags(std::string_view target) {
  if (target == "across-pp" || target == "across-src" || target == "long-vp") return {std::string(target)};
  if (target == "across-orc") return {"across-orc", "across-orc-no-that"};
  throw ConfigError("ablate.target must be one of across-pp, across-src, across-orc, long-vp; got '" +
                    std::string(target) + "'");
}

std::vector<std::string> pattern_ablation_suite(std::string_view target) {
  if (target == "long-vp") return {"long-vp-coord"};
  return pattern_ablation_tags(target);
}

const std::vector<std::string>& ablation_suite_constructions() {
  static const std::vector<std::string> tags = {"across-pp", "across-src", "across-orc", "across-orc-no-that",
                                                "long-vp-coord"};
  return tags;
}

std::size_t orc_count(const negex::Corpus& corpus) {
  std::size_t c = 0;
  for (const auto& s : corpus) c += s.construction == "across-orc" || s.construction == "across-orc-no-that";
  return c;
}

std::size_t extra_orc_for_share(const negex::Corpus& corpus, double share) {
  if (!(share >= 0.0 && share < 1.0)) throw ConfigError("object-RC share must lie in [0, 1)");
  const double n = static_cast<double>(corpus.size());
  const double c = static_cast<double>(orc_count(corpus));
  const double k = (share * n - c) / (1.0 - share);
  return k <= 0.0 ? 0 : static_cast<std::size_t>(std::llround(k));
}

namespace {

std::vector<TokenIds> encode_plain(const negex::Corpus& corpus, const Vocabulary& vocab) {
  std::vector<TokenIds> out;
  out.reserve(corpus.size());
  for (const auto& s : corpus) out.push_back(vocab.encode(s.tokens));
  return out;
}

std::string run_key(const ExperimentConfig& config, const Vocabulary& vocab, const negex::Corpus& train_set,
                    const negex::Corpus& dev_set, std::uint64_t seed) {
  std::string key;
  for (const auto& line : split_lines(config.resolved())) {
    if (line.starts_with("model.") || line.starts_with("loss.") || line.starts_with("train.")) {
      key += line;
      key += '\n';
    }
  }
  key += "seed = " + std::to_string(seed) + "\n";
  key += "vocab = " + fnv1a_hex(vocab.serialize()) + "\n";
  key += "train_set = " + fnv1a_hex(negex::serialize_corpus(train_set)) + "\n";
  key += "dev_set = " + fnv1a_hex(negex::serialize_corpus(dev_set)) + "\n";
  return key;
}

train::TrainLog parse_trainlog(std::string_view text) {
  train::TrainLog log;
  bool header = true;
  for (auto line : split_lines(text)) {
    if (line.empty() || line.starts_with("#")) {
      if (line.starts_with("# best_step = ")) log.best_step = std::stoul(std::string(line.substr(14)));
      if (line.starts_with("# best_dev_ppl = ")) log.best_dev_ppl = std::stod(std::string(line.substr(17)));
      continue;
    }
    if (header) {
      header = false;
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 5) throw std::runtime_error("malformed trainlog line");
    train::TrainRecord r;
    r.step = std::stoul(f[0]);
    r.lr = std::stod(f[1]);
    r.lm_loss = std::stod(f[2]);
    r.aux_loss = std::stod(f[3]);
    r.dev_ppl = std::stod(f[4]);
    log.records.push_back(r);
  }
  return log;
}

std::string fmt(double v, const char* spec = "%.6f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

SeedRun train_seed(const ExperimentConfig& config, const Vocabulary& vocab, const negex::Corpus& train_set,
                   const negex::Corpus& dev_set, std::uint64_t seed, const fs::path& dir) {
  const std::string key = run_key(config, vocab, train_set, dev_set, seed);
  const auto ckpt_path = dir / "model.ckpt";
  if (fs::exists(dir / "run.key") && fs::exists(ckpt_path) && fs::exists(dir / "trainlog.csv") &&
      read_file(dir / "run.key") == key) {
    auto ck = model::load_checkpoint(ckpt_path);
    if (!(ck.vocab == vocab)) throw std::runtime_error("checkpoint vocabulary mismatch in " + dir.string());
    return SeedRun{seed, std::move(ck.model), parse_trainlog(read_file(dir / "trainlog.csv")), true};
  }

  model::LmConfig mc = config.model;
  mc.vocab_size = vocab.size();
  SeedRun run{seed, model::LanguageModel(mc), {}, false};
  Rng init(seed);
  run.lm.initialize(init);
  loss::BinaryHead head(mc.hidden_dim);
  head.initialize(init);

  train::TrainConfig tc = config.train;
  tc.seed = seed;
  const auto encoded = loss::encode(train_set, vocab);
  const auto dev = encode_plain(dev_set, vocab);

  const auto t0 = std::chrono::steady_clock::now();
  run.log = train::train(run.lm, &head, encoded, dev, config.loss, tc);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cerr << "[train] " << dir.string() << ": " << run.log.records.size() << " checks, best dev ppl "
            << fmt(run.log.best_dev_ppl, "%.4f") << " at step " << run.log.best_step << ", " << fmt(secs, "%.0f")
            << "s" << (run.log.aborted ? " (aborted: " + run.log.diagnostic + ")" : std::string()) << "\n";

  fs::create_directories(dir);
  model::save_checkpoint(ckpt_path, run.lm, vocab);
  const std::vector<std::string> comments = {"config-hash: " + config.hash(), "seed = " + std::to_string(seed),
                                             "best_step = " + std::to_string(run.log.best_step),
                                             "best_dev_ppl = " + fmt(run.log.best_dev_ppl, "%.17g"),
                                             "anneal: " + run.log.anneal_rule};
  write_file(dir / "trainlog.csv", train::trainlog_csv(run.log, comments));
  write_file(dir / "run.key", key);
  if (run.log.aborted) throw std::runtime_error("training aborted in " + dir.string() + ": " + run.log.diagnostic);
  return run;
}

SeedEval evaluate_seed(model::LanguageModel& lm, const Vocabulary& vocab, std::span<const syneval::TestCase> suite,
                       const negex::Corpus& test_set, std::size_t threads) {
  SeedEval e;
  e.outcomes = syneval::score_suite(lm, vocab, suite, threads);
  e.report = syneval::summarize(suite, e.outcomes);
  const auto test = encode_plain(test_set, vocab);
  e.test_ppl = train::perplexity(lm, test);
  return e;
}

Stat mean_sd(std::span<const double> values) {
  Stat s;
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

const AggregateRow* Aggregate::find(std::string_view construction) const {
  for (const auto& r : rows) {
    if (r.construction == construction) return &r;
  }
  return nullptr;
}

Aggregate aggregate(std::span<const SeedEval> evals) {
  Aggregate agg;
  agg.seeds = evals.size();
  if (evals.empty()) return agg;
  for (const auto& row : evals.front().report.rows) {
    std::vector<double> acc;
    for (const auto& e : evals) acc.push_back(e.report.accuracy(row.construction));
    agg.rows.push_back({row.construction, row.n, mean_sd(acc)});
  }
  std::vector<double> ppl;
  for (const auto& e : evals) ppl.push_back(e.test_ppl);
  agg.perplexity = mean_sd(ppl);
  return agg;
}

Stat macro_stat(std::span<const SeedEval> evals, std::string_view category) {
  std::vector<double> v;
  for (const auto& e : evals) v.push_back(e.report.macro_average(category));
  return mean_sd(v);
}

Stat pooled_stat(std::span<const SeedEval> evals, std::span<const std::string> constructions) {
  std::vector<double> v;
  for (const auto& e : evals) {
    std::size_t n = 0, correct = 0;
    for (const auto& c : constructions) {
      if (const auto* r = e.report.find(c)) {
        n += r->n;
        correct += r->correct;
      }
    }
    if (n == 0) throw std::invalid_argument("pooled_stat: no matching constructions evaluated");
    v.push_back(static_cast<double>(correct) / static_cast<double>(n));
  }
  return mean_sd(v);
}

std::string hash_comment(const ExperimentConfig& config) { return "# config-hash: " + config.hash() + "\n"; }

std::string aggregate_csv(const Aggregate& agg, const ExperimentConfig& config) {
  std::string out = hash_comment(config);
  out += "construction,n,seeds,mean,sd\n";
  for (const auto& r : agg.rows) {
    out += r.construction + "," + std::to_string(r.n) + "," + std::to_string(agg.seeds) + "," +
           fmt(r.accuracy.mean) + "," + fmt(r.accuracy.sd) + "\n";
  }
  out += "perplexity,," + std::to_string(agg.seeds) + "," + fmt(agg.perplexity.mean, "%.4f") + "," +
         fmt(agg.perplexity.sd, "%.4f") + "\n";
  return out;
}

std::string aggregate_markdown(const Aggregate& agg, std::string_view title) {
  std::string out = "| construction | " + std::string(title) + " |\n|---|---|\n";
  std::string_view last_category;
  for (const auto& r : agg.rows) {
    const auto cat = syneval::category_of(r.construction);
    if (cat != last_category) {
      out += "| **" + std::string(cat) + "** | |\n";
      last_category = cat;
    }
    out += "| " + std::string(syneval::display_name(r.construction)) + " | " + fmt(100.0 * r.accuracy.mean, "%.1f") +
           " (" + fmt(100.0 * r.accuracy.sd, "%.1f") + ") |\n";
  }
  out += "| perplexity | " + fmt(agg.perplexity.mean, "%.2f") + " (" + fmt(agg.perplexity.sd, "%.2f") + ") |\n";
  return out;
}

void write_resolved(const fs::path& dir, const ExperimentConfig& config) {
  fs::create_directories(dir);
  write_file(dir / "config.resolved", "# config-hash: " + config.hash() + "\n" + config.resolved());
}

}  // namespace negexlm::cli
