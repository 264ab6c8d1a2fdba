#pragma once

#include <cstddef>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "negexlm/inflect.hpp"

namespace negexlm::negex {

enum class TargetKind { kPresentVerb, kReflexive };

std::string_view target_kind_name(TargetKind k);
TargetKind parse_target_kind(std::string_view s);

/// A token for which negative examples are created.
struct TargetAnnotation {
  std::size_t position = 0;
  TargetKind kind = TargetKind::kPresentVerb;
  Number number = Number::kSingular;
  std::string lemma;
  std::vector<std::string> negatives;

  friend bool operator==(const TargetAnnotation&, const TargetAnnotation&) = default;
};

struct AnnotatedSentence {
  std::vector<std::string> tokens;
  std::vector<TargetAnnotation> targets;
  std::string construction = "none";

  friend bool operator==(const AnnotatedSentence&, const AnnotatedSentence&) = default;
};

using Corpus = std::vector<AnnotatedSentence>;

/// Construction tags a corpus sentence may carry.
const std::vector<std::string>& construction_tags();
bool is_construction_tag(std::string_view tag);

/// Builds targets from gold tags: VBZ/VBP mark singular/plural present verbs,
/// PRP on a reflexive pronoun marks a reflexive. Verbs the inflector cannot
/// handle are skipped and counted in *skipped.
AnnotatedSentence annotate_targets(std::vector<std::string> tokens, std::span<const std::string> tags,
                                   const Inflector& inflector, std::string construction = "none",
                                   std::size_t* skipped = nullptr);

/// One sentence per (target, negative) pair, ordered by position then by
/// negative list order. Each differs from s.tokens at exactly one position.
std::vector<std::vector<std::string>> negative_sentences(const AnnotatedSentence& s);

/// Drops targets whose lemma is excluded. Excluded words are passed through
/// the inflector's lemma table, so "is" removes targets with lemma "be".
Corpus filter_targets_by_lemma(const Corpus& corpus, const std::set<std::string>& excluded_lemmas,
                               const Inflector& inflector);

/// Drops every target of sentences tagged excluded_tag. Unknown tags throw.
Corpus filter_targets_by_construction(const Corpus& corpus, std::string_view excluded_tag);

std::size_t count_targets(const Corpus& corpus);

/// Annotated corpus file: tokens TAB construction TAB targets, one sentence
/// per line. Targets are "position,kind,number,lemma,neg1|neg2" joined by ';'.
std::string format_sentence(const AnnotatedSentence& s);
AnnotatedSentence parse_sentence(std::string_view line);
std::string serialize_corpus(const Corpus& corpus);
Corpus parse_corpus(std::string_view text);
void save_corpus(const std::filesystem::path& path, const Corpus& corpus);
Corpus load_corpus(const std::filesystem::path& path);

}  // namespace negexlm::negex
