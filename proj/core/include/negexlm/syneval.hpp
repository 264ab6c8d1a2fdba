#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "negexlm/lexicon.hpp"
#include "negexlm/lstm_lm.hpp"
#include "negexlm/vocab.hpp"

namespace negexlm::syneval {

/// Minimal pair differing at exactly one position.
struct TestCase {
  std::vector<std::string> grammatical;
  std::vector<std::string> ungrammatical;
  std::string construction;
  std::size_t position = 0;

  friend bool operator==(const TestCase&, const TestCase&) = default;
};

/// The 15 suite constructions in report row order.
const std::vector<std::string>& suite_constructions();
bool is_suite_construction(std::string_view tag);
/// "agreement", "reflexive" or "npi".
std::string_view category_of(std::string_view construction);
const std::vector<std::string>& categories();
/// Human-readable row label for the markdown report.
std::string_view display_name(std::string_view construction);

/// n cases per requested tag, drawn from suite-pool words. Duplicate pairs are
/// avoided while fresh ones can be found. Unknown tags throw.
std::vector<TestCase> generate_suite(const corpus::Lexicon& lexicon, std::span<const std::string> constructions,
                                     std::size_t n_per_construction, std::uint64_t seed);

enum class Outcome { kCorrect, kIncorrect, kTie };

/// Correct iff the grammatical sentence has strictly higher log-likelihood.
Outcome score_pair(model::LanguageModel& lm, const Vocabulary& vocab, const TestCase& c);
Outcome compare(double logp_grammatical, double logp_ungrammatical);

struct ConstructionResult {
  std::string construction;
  std::size_t n = 0;
  std::size_t correct = 0;
  std::size_t ties = 0;
  double accuracy() const { return n == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(n); }
};

struct SuiteReport {
  std::vector<ConstructionResult> rows;  // suite order, constructions present only
  std::size_t unk_tokens = 0;            // out-of-vocabulary tokens seen while scoring

  const ConstructionResult* find(std::string_view construction) const;
  /// Accuracy of a construction; throws if it was not evaluated.
  double accuracy(std::string_view construction) const;
  /// Unweighted mean of member-construction accuracies; NaN if none evaluated.
  double macro_average(std::string_view category) const;
};

/// Per-case outcomes in suite order.
std::vector<Outcome> score_suite(model::LanguageModel& lm, const Vocabulary& vocab, std::span<const TestCase> suite,
                                 std::size_t threads = 1);
SuiteReport evaluate(model::LanguageModel& lm, const Vocabulary& vocab, std::span<const TestCase> suite,
                     std::size_t threads = 1);
SuiteReport summarize(std::span<const TestCase> suite, std::span<const Outcome> outcomes);

/// Cases whose head noun is animate.
std::vector<TestCase> animate_subset(std::span<const TestCase> suite, const corpus::Lexicon& lexicon);

/// Long VP coordination accuracy split by the target (second) verb being
/// "like" and, among the other cases, by the first verb being "likes"/"like".
struct VerbBreakdown {
  ConstructionResult all, target_like, target_other, first_like, first_other;
};
VerbBreakdown long_vp_breakdown(std::span<const TestCase> suite, std::span<const Outcome> outcomes);

/// Suite file: grammatical TAB ungrammatical TAB construction TAB position.
std::string serialize_suite(std::span<const TestCase> suite);
std::vector<TestCase> parse_suite(std::string_view text);
void save_suite(const std::filesystem::path& path, std::span<const TestCase> suite);
std::vector<TestCase> load_suite(const std::filesystem::path& path);

/// CSV with columns construction,n,correct,ties,accuracy.
std::string report_csv(const SuiteReport& report);
SuiteReport parse_report_csv(std::string_view text);

}  // namespace negexlm::syneval
