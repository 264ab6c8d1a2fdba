#include "negexlm_cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>

#include "negexlm/corpus.hpp"
#include "negexlm/inflect.hpp"
#include "negexlm/lexicon.hpp"
#include "negexlm/text_io.hpp"

namespace negexlm::cli {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v, const char* spec = "%.6f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string stat_cols(const Stat& s) { return fmt(s.mean) + "," + fmt(s.sd); }

std::string delta_label(double d) {
  std::string s = fmt(d, "%g");
  return s;
}

fs::path seed_dir(const fs::path& base, std::uint64_t seed) { return base / ("seed-" + std::to_string(seed)); }

Dataset require_dataset(const ExperimentConfig& config) {
  const auto dir = config.data_path();
  if (!fs::exists(dir / "train.tsv")) {
    throw std::runtime_error("no corpus in " + dir.string() + " (run gen-corpus first)");
  }
  return load_dataset(dir);
}

std::vector<syneval::TestCase> subset(std::span<const syneval::TestCase> suite, std::span<const std::string> tags) {
  std::vector<syneval::TestCase> out;
  for (const auto& c : suite) {
    for (const auto& t : tags) {
      if (c.construction == t) {
        out.push_back(c);
        break;
      }
    }
  }
  return out;
}

std::vector<SeedEval> train_and_eval(const ExperimentConfig& config, const Dataset& data,
                                     const negex::Corpus& train_set, std::span<const syneval::TestCase> suite,
                                     const fs::path& dir) {
  write_resolved(dir, config);
  std::vector<SeedEval> out;
  for (auto seed : config.seeds) {
    auto run = train_seed(config, data.vocab, train_set, data.dev, seed, seed_dir(dir, seed));
    auto e = evaluate_seed(run.lm, data.vocab, suite, data.test, config.threads);
    e.seed = seed;
    write_file(seed_dir(dir, seed) / "report.csv",
               hash_comment(config) + "# test_ppl = " + fmt(e.test_ppl, "%.17g") + "\n" + syneval::report_csv(e.report));
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace

Dataset cmd_gen_corpus(const ExperimentConfig& config) {
  config.validate();
  auto data = generate_dataset(config);
  const auto dir = config.data_path();
  save_dataset(dir, data);
  write_resolved(dir, config);
  std::string counts = hash_comment(config) + "split,construction,count\n";
  for (const auto& [name, part] : {std::pair<const char*, const negex::Corpus*>{"train", &data.train},
                                   {"dev", &data.dev},
                                   {"test", &data.test}}) {
    for (const auto& [tag, n] : corpus::construction_counts(*part)) {
      counts += std::string(name) + "," + tag + "," + std::to_string(n) + "\n";
    }
  }
  write_file(dir / "construction_counts.csv", counts);
  std::cerr << "[gen-corpus] " << data.train.size() << "/" << data.dev.size() << "/" << data.test.size()
            << " sentences, vocabulary " << data.vocab.size() << " -> " << dir.string() << "\n";
  return data;
}

std::vector<syneval::TestCase> cmd_gen_suite(const ExperimentConfig& config) {
  config.validate();
  auto suite = syneval::generate_suite(corpus::Lexicon::builtin(), syneval::suite_constructions(),
                                       config.suite_per_construction, config.suite_seed);
  fs::create_directories(config.out_dir);
  syneval::save_suite(config.out_dir / "suite.tsv", suite);
  write_resolved(config.out_dir, config);
  return suite;
}

std::vector<SeedRun> cmd_train(const ExperimentConfig& config) {
  config.validate();
  const auto data = require_dataset(config);
  write_resolved(config.out_dir, config);
  std::vector<SeedRun> runs;
  for (auto seed : config.seeds) {
    runs.push_back(train_seed(config, data.vocab, data.train, data.dev, seed, seed_dir(config.out_dir, seed)));
  }
  return runs;
}

EvalResult cmd_eval(const ExperimentConfig& config) {
  config.validate();
  const auto data = require_dataset(config);
  const auto suite = make_suite(config);
  EvalResult result;
  for (auto seed : config.seeds) {
    const auto path = seed_dir(config.out_dir, seed) / "model.ckpt";
    auto ck = model::load_checkpoint(path);
    if (!(ck.vocab == data.vocab)) {
      throw ConfigError("vocabulary of " + path.string() + " does not match " + config.data_path().string());
    }
    auto e = evaluate_seed(ck.model, ck.vocab, suite, data.test, config.threads);
    e.seed = seed;
    write_file(seed_dir(config.out_dir, seed) / "report.csv",
               hash_comment(config) + "# test_ppl = " + fmt(e.test_ppl, "%.17g") + "\n" + syneval::report_csv(e.report));
    result.seeds.push_back(std::move(e));
  }
  result.aggregate = aggregate(result.seeds);
  write_file(config.out_dir / "eval.csv", aggregate_csv(result.aggregate, config));
  write_file(config.out_dir / "eval.md",
             aggregate_markdown(result.aggregate, std::string(loss::loss_kind_name(config.loss.kind))));
  return result;
}

std::vector<SweepRow> cmd_sweep_margin(const ExperimentConfig& config) {
  config.validate();
  if (config.sweep_deltas.empty()) throw ConfigError("sweep.deltas must not be empty");
  const auto data = require_dataset(config);
  const auto suite = make_suite(config);
  const auto root = config.out_dir / "sweep";
  std::vector<SweepRow> rows;
  std::map<double, std::vector<SeedEval>> baseline;
  for (auto kind : {loss::LossKind::kSentenceMargin, loss::LossKind::kTokenMargin}) {
    for (double delta : config.sweep_deltas) {
      ExperimentConfig c = config;
      fs::path dir;
      if (delta == 0.0) {
        c.loss.kind = loss::LossKind::kNone;
        dir = root / "baseline";
      } else {
        c.loss.kind = kind;
        c.loss.delta = delta;
        dir = root / (std::string(loss::loss_kind_name(kind)) + "-delta-" + delta_label(delta));
      }
      c.out_dir = dir;
      const auto evals = train_and_eval(c, data, data.train, suite, dir);
      std::vector<double> ppl;
      for (const auto& e : evals) ppl.push_back(e.test_ppl);
      rows.push_back({std::string(loss::loss_kind_name(kind)), delta, macro_stat(evals, "agreement"),
                      macro_stat(evals, "reflexive"), macro_stat(evals, "npi"), mean_sd(ppl)});
    }
  }
  std::string csv = hash_comment(config) +
                    "kind,delta,agreement,agreement_sd,reflexive,reflexive_sd,npi,npi_sd,perplexity,perplexity_sd\n";
  for (const auto& r : rows) {
    csv += r.kind + "," + delta_label(r.delta) + "," + stat_cols(r.agreement) + "," + stat_cols(r.reflexive) + "," +
           stat_cols(r.npi) + "," + stat_cols(r.perplexity) + "\n";
  }
  write_file(config.out_dir / "sweep.csv", csv);

  std::string check = hash_comment(config) + "kind,agreement_delta10,agreement_delta1,delta10_at_least_delta1,ppl_increase_delta10\n";
  for (const auto* kind : {"sentence-margin", "token-margin"}) {
    const SweepRow *at10 = nullptr, *at1 = nullptr, *base = nullptr;
    for (const auto& r : rows) {
      if (r.kind != kind) continue;
      if (r.delta == 10.0) at10 = &r;
      if (r.delta == 1.0) at1 = &r;
      if (r.delta == 0.0) base = &r;
    }
    if (at10 && at1) {
      check += std::string(kind) + "," + fmt(at10->agreement.mean) + "," + fmt(at1->agreement.mean) + "," +
               (at10->agreement.mean >= at1->agreement.mean ? "true" : "false") + "," +
               (base ? fmt(at10->perplexity.mean - base->perplexity.mean) : std::string()) + "\n";
    }
  }
  write_file(config.out_dir / "sweep_check.csv", check);
  return rows;
}

std::vector<AugmentRow> cmd_augment_orc(const ExperimentConfig& config) {
  config.validate();
  if (config.augment_multipliers.empty()) throw ConfigError("augment.multipliers must not be empty");
  const auto data = require_dataset(config);
  const auto full_suite = make_suite(config);
  const std::vector<std::string> tags = {"across-orc", "across-orc-no-that", "across-src"};
  const auto suite = subset(full_suite, tags);
  const auto animate = syneval::animate_subset(subset(full_suite, std::vector<std::string>{"across-orc", "across-orc-no-that"}),
                                               corpus::Lexicon::builtin());
  const negex::Inflector inflector;
  const std::size_t base_orc = orc_count(data.train);
  std::vector<AugmentRow> rows;
  for (double m : config.augment_multipliers) {
    const auto extra = static_cast<std::size_t>(std::llround((m - 1.0) * static_cast<double>(base_orc)));
    const auto train_set = corpus::augment_orc(data.train, extra, config.corpus, corpus::Lexicon::builtin(), inflector);
    const auto dir = config.out_dir / "augment" / ("x" + delta_label(m));
    ExperimentConfig c = config;
    c.out_dir = dir;
    const auto evals = train_and_eval(c, data, train_set, suite, dir);
    AugmentRow row;
    row.multiplier = m;
    row.orc_sentences = base_orc + extra;
    row.orc_share = static_cast<double>(row.orc_sentences) / static_cast<double>(train_set.size());
    row.across_orc = pooled_stat(evals, std::vector<std::string>{"across-orc"});
    row.across_orc_no_that = pooled_stat(evals, std::vector<std::string>{"across-orc-no-that"});
    row.across_src = pooled_stat(evals, std::vector<std::string>{"across-src"});
    std::vector<double> a_that, a_no;
    for (auto seed : config.seeds) {
      auto ck = model::load_checkpoint(seed_dir(dir, seed) / "model.ckpt");
      const auto rep = syneval::evaluate(ck.model, ck.vocab, animate, config.threads);
      a_that.push_back(rep.accuracy("across-orc"));
      a_no.push_back(rep.accuracy("across-orc-no-that"));
    }
    row.animate_orc = mean_sd(a_that);
    row.animate_orc_no_that = mean_sd(a_no);
    rows.push_back(row);
  }
  std::string csv = hash_comment(config) +
                    "multiplier,orc_sentences,orc_share,across_orc,across_orc_sd,across_orc_no_that,across_orc_no_that_sd,"
                    "animate_orc,animate_orc_sd,animate_orc_no_that,animate_orc_no_that_sd,across_src,across_src_sd\n";
  for (const auto& r : rows) {
    csv += delta_label(r.multiplier) + "," + std::to_string(r.orc_sentences) + "," + fmt(r.orc_share) + "," +
           stat_cols(r.across_orc) + "," + stat_cols(r.across_orc_no_that) + "," + stat_cols(r.animate_orc) + "," +
           stat_cols(r.animate_orc_no_that) + "," + stat_cols(r.across_src) + "\n";
  }
  write_file(config.out_dir / "augment.csv", csv);
  return rows;
}

AblateResult cmd_ablate(const ExperimentConfig& config) {
  config.validate();
  const auto data = require_dataset(config);
  const negex::Inflector inflector;
  negex::Corpus train_set;
  std::string name;
  std::vector<std::string> ablated;
  if (config.ablate_mode == "token") {
    train_set = negex::filter_targets_by_lemma(data.train, token_ablation_lemmas(), inflector);
    name = "token";
  } else {
    train_set = data.train;
    for (const auto& tag : pattern_ablation_tags(config.ablate_target)) {
      train_set = negex::filter_targets_by_construction(train_set, tag);
    }
    name = "pattern-" + config.ablate_target;
    ablated = pattern_ablation_suite(config.ablate_target);
  }
  const auto full_suite = make_suite(config);
  const auto suite = subset(full_suite, ablation_suite_constructions());
  const auto dir = config.out_dir / "ablate" / name;
  ExperimentConfig c = config;
  c.out_dir = dir;
  AblateResult result;
  result.seeds = train_and_eval(c, data, train_set, suite, dir);
  result.aggregate = aggregate(result.seeds);
  result.evaluated = ablation_suite_constructions();

  std::string csv = hash_comment(config) + "construction,ablated,mean,sd\n";
  for (const auto& r : result.aggregate.rows) {
    const bool is_ablated = std::find(ablated.begin(), ablated.end(), r.construction) != ablated.end();
    csv += r.construction + "," + (is_ablated ? "true" : "false") + "," + stat_cols(r.accuracy) + "\n";
  }
  write_file(config.out_dir / ("ablate-" + name + ".csv"), csv);

  std::string vp = hash_comment(config) + "seed,group,n,correct,accuracy\n";
  for (const auto& e : result.seeds) {
    const auto b = syneval::long_vp_breakdown(suite, e.outcomes);
    for (const auto* r : {&b.all, &b.target_like, &b.target_other, &b.first_like, &b.first_other}) {
      vp += std::to_string(e.seed) + "," + r->construction + "," + std::to_string(r->n) + "," +
            std::to_string(r->correct) + "," + fmt(r->accuracy()) + "\n";
    }
  }
  write_file(config.out_dir / ("long_vp_breakdown-" + name + ".csv"), vp);
  return result;
}

}  // namespace negexlm::cli
