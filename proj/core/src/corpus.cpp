#include "negexlm/corpus.hpp"

#include <cmath>
#include <stdexcept>

#include "negexlm/grammar.hpp"
#include "negexlm/text_io.hpp"

namespace negexlm::corpus {

bool is_nonlocal(std::string_view construction) {
  return construction == "in-complement" || construction == "short-vp" || construction == "long-vp" ||
         construction == "across-pp" || construction == "across-src" || construction == "across-orc" ||
         construction == "across-orc-no-that";
}

std::map<std::string, double> CorpusConfig::default_mix() {
  return {{"simple", 0.30},     {"in-complement", 0.10}, {"short-vp", 0.08},   {"long-vp", 0.06},
          {"across-pp", 0.12},  {"across-src", 0.10},    {"across-orc", 0.01}, {"across-orc-no-that", 0.01},
          {"reflexive", 0.12},  {"npi", 0.10}};
}

void CorpusConfig::validate() const {
  if (num_sentences == 0) throw std::invalid_argument("num_sentences must be positive");
  if (mix.empty()) throw std::invalid_argument("construction mix is empty");
  double total = 0.0;
  for (const auto& [tag, p] : mix) {
    bool known = false;
    for (const auto& t : training_templates()) known = known || t.construction == tag;
    if (!known) throw std::invalid_argument("mix names unknown construction '" + tag + "'");
    if (!(p >= 0.0) || !std::isfinite(p)) throw std::invalid_argument("mix probabilities must be nonnegative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("mix probabilities must sum to 1");
  if (max_length == 0) throw std::invalid_argument("max_length must be positive");
}

negex::AnnotatedSentence generate_sentence(std::string_view construction, const Lexicon& lexicon,
                                           const negex::Inflector& inflector, bool disjoint_lexicon, Rng& rng) {
  std::vector<const Template*> candidates;
  for (const auto& t : training_templates()) {
    if (t.construction == construction) candidates.push_back(&t);
  }
  if (candidates.empty()) throw std::invalid_argument("no training template for '" + std::string(construction) + "'");
  const Template& t = *candidates[rng.below(candidates.size())];
  const Usage nouns = disjoint_lexicon && is_nonlocal(construction) ? Usage::kTrainingOnly : Usage::kTraining;
  Realization r = realize(t, lexicon, nouns, Usage::kTraining, rng);
  return negex::annotate_targets(std::move(r.tokens), r.tags, inflector, std::string(construction));
}

negex::Corpus generate_synthetic(const CorpusConfig& config, const Lexicon& lexicon,
                                 const negex::Inflector& inflector) {
  if (lexicon.empty()) throw std::invalid_argument("empty lexicon");
  config.validate();
  std::vector<std::pair<std::string, double>> cumulative;
  double acc = 0.0;
  for (const auto& [tag, p] : config.mix) {
    if (p <= 0.0) continue;
    acc += p;
    cumulative.emplace_back(tag, acc);
  }
  Rng rng(config.seed);
  negex::Corpus out;
  out.reserve(config.num_sentences);
  while (out.size() < config.num_sentences) {
    const double u = rng.uniform() * acc;
    std::size_t k = 0;
    while (k + 1 < cumulative.size() && u >= cumulative[k].second) ++k;
    auto s = generate_sentence(cumulative[k].first, lexicon, inflector, config.disjoint_lexicon, rng);
    if (s.tokens.size() <= config.max_length) out.push_back(std::move(s));
  }
  return out;
}

Vocabulary build_vocab(const negex::Corpus& corpus, std::size_t min_freq) {
  std::vector<std::vector<std::string>> sentences;
  sentences.reserve(corpus.size());
  for (const auto& s : corpus) sentences.push_back(s.tokens);
  return Vocabulary::build(sentences, min_freq);
}

negex::Corpus augment_orc(const negex::Corpus& corpus, std::size_t extra_orc_count, const CorpusConfig& config,
                          const Lexicon& lexicon, const negex::Inflector& inflector) {
  negex::Corpus out = corpus;
  Rng rng(config.seed ^ (0xa0761d6478bd642fULL * (corpus.size() + 1)));
  out.reserve(corpus.size() + extra_orc_count);
  for (std::size_t i = 0; i < extra_orc_count; ++i) {
    const char* tag = i % 2 == 0 ? "across-orc" : "across-orc-no-that";
    out.push_back(generate_sentence(tag, lexicon, inflector, config.disjoint_lexicon, rng));
  }
  return out;
}

Splits split(const negex::Corpus& corpus, double train_fraction, double dev_fraction, double test_fraction,
             std::uint64_t seed) {
  for (double f : {train_fraction, dev_fraction, test_fraction}) {
    if (!(f >= 0.0 && f <= 1.0)) throw std::invalid_argument("split fractions must lie in [0, 1]");
  }
  if (std::abs(train_fraction + dev_fraction + test_fraction - 1.0) > 1e-9) {
    throw std::invalid_argument("split fractions must sum to 1");
  }
  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  const auto n = static_cast<double>(corpus.size());
  const auto n_dev = static_cast<std::size_t>(std::floor(n * dev_fraction + 1e-9));
  const auto n_test = static_cast<std::size_t>(std::floor(n * test_fraction + 1e-9));
  const std::size_t n_train = corpus.size() - n_dev - n_test;
  Splits out;
  for (std::size_t k = 0; k < order.size(); ++k) {
    auto& dst = k < n_train ? out.train : k < n_train + n_dev ? out.dev : out.test;
    dst.push_back(corpus[order[k]]);
  }
  return out;
}

std::map<std::string, std::size_t> construction_counts(const negex::Corpus& corpus) {
  std::map<std::string, std::size_t> counts;
  for (const auto& s : corpus) ++counts[s.construction];
  return counts;
}

negex::Corpus load_plain_text(const std::filesystem::path& path, const Lexicon* lexicon,
                              const negex::Inflector* inflector) {
  negex::Corpus out;
  const negex::Inflector fallback;
  const negex::Inflector& inf = inflector != nullptr ? *inflector : fallback;
  for (std::string_view line : split_lines(read_file(path))) {
    auto tokens = split_whitespace(line);
    if (tokens.empty()) continue;
    if (lexicon != nullptr) {
      const auto tags = tag_tokens(tokens, *lexicon);
      out.push_back(negex::annotate_targets(std::move(tokens), tags, inf));
    } else {
      negex::AnnotatedSentence s;
      s.tokens = std::move(tokens);
      out.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace negexlm::corpus
