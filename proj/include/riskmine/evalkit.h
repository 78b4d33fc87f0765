#pragma once

// Pairwise evaluation: baseline sampling, evaluation pair construction,
// judgment ingestion and the preference statistics (Pearson chi-square with
// a uniform null, Cohen's kappa).

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "riskmine/matcher.h"
#include "riskmine/text.h"

namespace riskmine {

inline constexpr const char* kLabelSingle = "single";
inline constexpr const char* kLabelMulti = "multi";
inline constexpr const char* kLabelBaseline = "baseline";

struct BaselineChoice {
  std::size_t sentence = 0;
  std::string text;
};

// Uniform sentence draw, deterministic in seed. Throws kNoSentences.
BaselineChoice sample_baseline(const Document& doc, std::uint64_t seed);

enum class PairScheme { kSingleVsBase, kMultiVsBase, kSingleVsMulti };
std::string_view to_string(PairScheme s);

struct PairSide {
  std::string label;
  std::string text;
};

struct EvaluationPair {
  std::string pair_id;
  std::string category;
  std::string set;  // "seed" or "expanded"
  PairScheme scheme = PairScheme::kSingleVsMulti;
  PairSide side_a;
  PairSide side_b;
};

struct PairingResult {
  std::vector<EvaluationPair> pairs;
  // Records left without a partner, per category.
  std::map<std::string, std::size_t> leftovers;
};

// Within-category pairing. vs-baseline schemes pair each record of the
// scope with its own baseline sentence; single-vs-multi shuffles both sides
// and zips them. A/B side order is a per-pair coin flip. Throws
// kInsufficientRecords when no category has both sides.
PairingResult build_pairs(const std::vector<ExtractionRecord>& records, PairScheme scheme,
                          std::uint64_t seed, const std::string& set);

void write_pairs(std::ostream& out, const std::vector<EvaluationPair>& pairs);
std::vector<EvaluationPair> read_pairs(std::istream& in, const std::string& name);
std::vector<EvaluationPair> read_pairs(const std::filesystem::path& path);

enum class Choice { kA, kB, kNeither };
std::string_view to_string(Choice c);

struct JudgmentRecord {
  std::string pair_id;
  std::string annotator_id;
  Choice choice = Choice::kNeither;
};

// CSV "pair_id,annotator_id,choice" with choice in {A,B,NEITHER}; an
// optional header line is skipped. Errors carry line numbers.
std::vector<JudgmentRecord> read_judgments(std::istream& in, const std::string& name);
std::vector<JudgmentRecord> read_judgments(const std::filesystem::path& path);

struct PreferenceSummary {
  std::map<std::string, std::size_t> wins;  // per system label
  std::size_t neither = 0;
  std::size_t total = 0;

  std::size_t preferred() const { return total - neither; }
  // Non-Neither share of all judgments; 0 when there are none.
  double preference_rate() const;
  // Share of non-Neither judgments won by `label`; empty when undefined.
  std::optional<double> proportion(const std::string& label) const;
};

// Maps A/B choices back to system labels through each pair's side order.
// Throws kUnknownPair listing every unknown pair id.
PreferenceSummary summarize(const std::vector<JudgmentRecord>& judgments,
                            const std::vector<EvaluationPair>& pairs);

struct ChiSquareResult {
  double chi2 = 0.0;
  int df = 1;
  double p = 1.0;
};

// Two-cell goodness of fit against a 50/50 null. Throws kEmptyComparison.
ChiSquareResult chi_square_preference(std::uint64_t count_x, std::uint64_t count_y);

// Upper tail of the chi-square distribution. df = 1 uses erfc(sqrt(x/2));
// other df use the regularized upper incomplete gamma Q(df/2, x/2).
// Throws kDomainError for x < 0 or df < 1.
double chi2_survival(double x, int df = 1);

// kappa = (p_o - p_e) / (1 - p_e); 1 for the degenerate p_e = p_o = 1 case.
// Throws kLengthMismatch or kEmptyInput.
double cohens_kappa(const std::vector<Choice>& first, const std::vector<Choice>& second);

struct ComparisonResult {
  std::string code;  // e.g. "sbs" = single v. baseline (seed)
  std::string description;
  std::string set;  // "seed", "expanded" or "all"
  PairScheme scheme = PairScheme::kSingleVsMulti;
  PreferenceSummary summary;
  std::optional<ChiSquareResult> test;  // empty when every judgment is Neither
};

struct KappaResult {
  std::string category;
  std::size_t items = 0;
  double kappa = 0.0;
};

struct EvalReport {
  PreferenceSummary overall;
  std::vector<ComparisonResult> comparisons;  // six pairings + pooled overall
  std::vector<KappaResult> kappa;             // empty when no double annotation
};

EvalReport evaluate(const std::vector<EvaluationPair>& pairs,
                    const std::vector<JudgmentRecord>& judgments);

// JSON with per-comparison {chi2, df, p, counts} and per-category kappa.
std::string report_to_json(const EvalReport& report);

}  // namespace riskmine
