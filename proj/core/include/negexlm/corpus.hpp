#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "negexlm/annotation.hpp"
#include "negexlm/lexicon.hpp"
#include "negexlm/rng.hpp"
#include "negexlm/vocab.hpp"

namespace negexlm::corpus {

/// Constructions with a long-distance dependency; with a disjoint lexicon
/// their nouns come from the training-only pool.
bool is_nonlocal(std::string_view construction);

struct CorpusConfig {
  std::size_t num_sentences = 10000;
  std::map<std::string, double> mix = default_mix();
  std::uint64_t seed = 1;
  /// Keep suite nouns out of non-local training constructions.
  bool disjoint_lexicon = false;
  std::size_t max_length = 20;

  static std::map<std::string, double> default_mix();
  /// Mix tags must be generatable and probabilities must sum to 1 within 1e-9.
  void validate() const;
};

/// One sentence of a construction with gold targets.
negex::AnnotatedSentence generate_sentence(std::string_view construction, const Lexicon& lexicon,
                                           const negex::Inflector& inflector, bool disjoint_lexicon, Rng& rng);

/// num_sentences sentences with tags drawn from the mix.
negex::Corpus generate_synthetic(const CorpusConfig& config, const Lexicon& lexicon,
                                 const negex::Inflector& inflector);

Vocabulary build_vocab(const negex::Corpus& corpus, std::size_t min_freq);

/// Appends extra_orc_count fresh object-RC sentences, half with "that" and
/// half without (the odd one has "that"). Drawn from a stream derived from
/// config.seed and the current corpus size, disjoint from the base stream.
negex::Corpus augment_orc(const negex::Corpus& corpus, std::size_t extra_orc_count, const CorpusConfig& config,
                          const Lexicon& lexicon, const negex::Inflector& inflector);

struct Splits {
  negex::Corpus train;
  negex::Corpus dev;
  negex::Corpus test;
};

/// Shuffled partition. Dev and test sizes are floor(n * fraction); train
/// takes the rest.
Splits split(const negex::Corpus& corpus, double train_fraction, double dev_fraction, double test_fraction,
             std::uint64_t seed);

std::map<std::string, std::size_t> construction_counts(const negex::Corpus& corpus);

/// One sentence per line, whitespace tokens. With a lexicon the closed-lexicon
/// tagger supplies targets; otherwise sentences carry none.
negex::Corpus load_plain_text(const std::filesystem::path& path, const Lexicon* lexicon = nullptr,
                              const negex::Inflector* inflector = nullptr);

}  // namespace negexlm::corpus
