#pragma once

// Categorized risk keywords, the entity list, and the expansion/curation
// workflow that grows the keyword set.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "riskmine/text.h"

namespace riskmine {

enum class Provenance { kSeed, kExpanded };
enum class TermStatus { kActive, kCandidate, kRejected };
enum class Decision { kAccept, kReject };

std::string_view to_string(Provenance p);
std::string_view to_string(TermStatus s);
std::string_view to_string(Decision d);

struct TaxonomyTerm {
  std::string term;
  std::string category;
  Provenance provenance = Provenance::kSeed;
  TermStatus status = TermStatus::kActive;
  std::vector<std::string> lemma_tokens;
  // Set on expansion candidates: the term that proposed it and its score.
  std::optional<std::string> source_term;
  std::optional<double> score;

  bool operator==(const TaxonomyTerm&) const = default;
};

struct TermId {
  std::string category;
  std::string term;
};

// One term proposed by embedding similarity for a source term's category.
struct ExpansionCandidate {
  std::string category;
  std::string source_term;
  std::string candidate;
  double score = 0.0;
};

class Taxonomy {
 public:
  Taxonomy() = default;

  const std::vector<TaxonomyTerm>& terms() const { return terms_; }
  const std::set<std::string>& categories() const { return categories_; }

  // Terms participating in matching.
  std::vector<const TaxonomyTerm*> active_terms() const;

  // Active + candidate count for one category.
  std::size_t live_count(const std::string& category) const;
  std::size_t count(TermStatus status) const;

  // Lookup by (category, lemma_tokens) regardless of status.
  const TaxonomyTerm* find(const std::string& category,
                           const std::vector<std::string>& lemma_tokens) const;

  // Adds a term, collapsing onto an existing (category, lemma_tokens) entry:
  // provenance becomes seed if either side is seed, and status follows
  // active > rejected > candidate. Returns true when a new entry was created.
  bool add(TaxonomyTerm term);

  void add_category(std::string category) { categories_.insert(std::move(category)); }

  // Returns false when no such term exists.
  bool set_status(const std::string& category,
                  const std::vector<std::string>& lemma_tokens, TermStatus status);

  bool operator==(const Taxonomy&) const = default;

 private:
  std::vector<TaxonomyTerm> terms_;
  std::set<std::string> categories_;
  std::map<std::pair<std::string, std::vector<std::string>>, std::size_t> index_;
};

// TSV rows: category<TAB>term<TAB>seed|expanded<TAB>active|candidate|rejected
// with optional trailing <TAB>source_term<TAB>score on expansion candidates.
Taxonomy parse_taxonomy(std::istream& in, const std::string& name,
                        const Ingestor& ingestor = default_ingestor());
Taxonomy load_taxonomy(const std::filesystem::path& path,
                       const Ingestor& ingestor = default_ingestor());
void write_taxonomy(std::ostream& out, const Taxonomy& taxonomy);
void save_taxonomy(const std::filesystem::path& path, const Taxonomy& taxonomy);

struct Entity {
  std::string canonical_name;
  std::vector<std::string> aliases;  // aliases[0] is the canonical name
  std::vector<std::vector<std::string>> alias_lemmas;
};

struct EntityList {
  std::vector<Entity> entities;

  std::size_t size() const { return entities.size(); }
};

// One entity per line, aliases separated by '|'.
EntityList parse_entities(std::istream& in, const std::string& name,
                          const Ingestor& ingestor = default_ingestor());
EntityList load_entities(const std::filesystem::path& path,
                         const Ingestor& ingestor = default_ingestor());

// Adds surviving candidates as expanded/candidate terms. Drops candidates
// with no letter, ones whose lemmas already exist in the category (any
// status, so rejections stick), and punctuation/whitespace variants.
Taxonomy merge_expansion(const Taxonomy& taxonomy,
                         const std::vector<ExpansionCandidate>& candidates,
                         const Ingestor& ingestor = default_ingestor());

// Throws kUnknownTerm or kNotACandidate.
Taxonomy curate(const Taxonomy& taxonomy, const TermId& id, Decision decision,
                const Ingestor& ingestor = default_ingestor());

struct CurationDecision {
  std::string term;
  std::string category;
  Decision decision = Decision::kAccept;
  std::string timestamp;
};

// Log lines: term<TAB>category<TAB>accept|reject<TAB>timestamp.
std::vector<CurationDecision> read_decisions(const std::filesystem::path& path);
void append_decision(const std::filesystem::path& path, const CurationDecision& d);

// Replays decisions onto matching candidates; decisions for terms that are
// missing or no longer candidates are skipped. Returns the number applied.
std::size_t apply_decisions(Taxonomy& taxonomy,
                            const std::vector<CurationDecision>& decisions,
                            const Ingestor& ingestor = default_ingestor());

struct CategoryIncrease {
  std::string category;
  std::size_t before = 0;
  std::size_t after = 0;
  double percent = 0.0;
};

struct ExpansionReport {
  std::vector<CategoryIncrease> categories;
  double average_percent = 0.0;
};

// percent = 100 * (after - before) / before over active + candidate terms;
// the average is the arithmetic mean across categories.
ExpansionReport expansion_report(const Taxonomy& before, const Taxonomy& after);
ExpansionReport expansion_report_from_counts(
    const std::vector<CategoryIncrease>& counts);

// Letters and digits of the joined lemmas; equal keys mean the two terms
// differ only by punctuation or whitespace.
std::string punctuation_free_key(const std::vector<std::string>& lemma_tokens);

}  // namespace riskmine
