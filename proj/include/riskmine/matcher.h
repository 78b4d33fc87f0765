#pragma once

// Keyword/entity occurrence search, nearest-entity pairing, distance
// filtering, sentence-scope classification and span retrieval.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "riskmine/taxonomy.h"
#include "riskmine/text.h"

namespace riskmine {

// A set of lemma sequences matched as contiguous token runs. Each phrase
// carries an owner id (taxonomy term index or entity index).
class PhraseSet {
 public:
  std::size_t add(std::vector<std::string> lemmas, std::size_t owner);

  std::size_t size() const { return phrases_.size(); }
  const std::vector<std::string>& lemmas(std::size_t phrase) const {
    return phrases_[phrase];
  }
  std::size_t owner(std::size_t phrase) const { return owners_[phrase]; }

  // Phrase ids whose first lemma equals `lemma`, in insertion order.
  const std::vector<std::size_t>* starting_with(const std::string& lemma) const;

 private:
  std::vector<std::vector<std::string>> phrases_;
  std::vector<std::size_t> owners_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_first_;
};

struct Occurrence {
  std::size_t phrase = 0;  // id in the PhraseSet that produced it
  std::size_t owner = 0;
  std::size_t start = 0;
  std::size_t end = 0;  // exclusive

  bool operator==(const Occurrence&) const = default;
};

enum class Scope { kSameSentence, kMultiSentence };
std::string_view to_string(Scope s);

struct Match {
  Occurrence keyword;
  Occurrence entity;
  std::size_t distance = 0;
  Scope scope = Scope::kSameSentence;
};

struct ExtractionRecord {
  std::string doc_id;
  std::string category;
  std::string keyword;
  std::string entity;
  Provenance provenance = Provenance::kSeed;
  std::size_t distance = 0;
  Scope scope = Scope::kSameSentence;
  std::size_t first_sentence = 0;
  std::size_t last_sentence = 0;
  std::string span_text;
  std::size_t keyword_start = 0;
  std::size_t keyword_end = 0;
  std::size_t entity_start = 0;
  std::size_t entity_end = 0;
  std::optional<std::string> baseline_text;
  bool baseline_coincides = false;

  bool operator==(const ExtractionRecord&) const = default;
};

// Work counters used to check the complexity contract of pair_nearest.
struct MatchCounters {
  std::uint64_t probes = 0;
};

// Occurrences of every phrase, sorted by (start, end, phrase). Occurrences
// of one phrase are disjoint (greedy left to right); different phrases may
// overlap.
std::vector<Occurrence> find_occurrences(const Document& doc, const PhraseSet& phrases);

// Tokens strictly between the two spans; 0 when adjacent or overlapping.
std::size_t token_distance(const Occurrence& a, const Occurrence& b);

// For each keyword occurrence, the entity occurrence minimizing
// (distance, start, end, phrase); ties therefore go to the preceding entity.
// entity_occs must be sorted by (start, end, phrase). Binary search over the
// sorted entity positions: O(log E) probes per keyword.
std::vector<Match> pair_nearest(const std::vector<Occurrence>& keyword_occs,
                                const std::vector<Occurrence>& entity_occs,
                                MatchCounters* counters = nullptr);

// Keeps matches with distance <= max_distance, order preserved.
std::vector<Match> filter_by_cutoff(const std::vector<Match>& matches,
                                    std::size_t max_distance);

Scope classify_scope(const Match& match, const Document& doc);

struct SentenceSpan {
  std::size_t first_sentence = 0;
  std::size_t last_sentence = 0;
  std::string text;
};

// Original text from the first token of the earliest sentence through the
// last token of the latest sentence touched by either occurrence.
SentenceSpan retrieve_span(const Match& match, const Document& doc);

// Taxonomy + entity list compiled for matching; immutable and shareable
// across worker threads.
class Extractor {
 public:
  Extractor(const Taxonomy& taxonomy, const EntityList& entities);

  std::vector<ExtractionRecord> extract(const Document& doc, std::size_t max_distance,
                                        MatchCounters* counters = nullptr) const;

  std::vector<Occurrence> keyword_occurrences(const Document& doc) const {
    return find_occurrences(doc, keywords_);
  }
  std::vector<Occurrence> entity_occurrences(const Document& doc) const {
    return find_occurrences(doc, entity_phrases_);
  }

  const PhraseSet& keyword_phrases() const { return keywords_; }
  const PhraseSet& entity_phrases() const { return entity_phrases_; }
  const std::vector<TaxonomyTerm>& keyword_terms() const { return terms_; }
  const EntityList& entities() const { return entities_; }

 private:
  std::vector<TaxonomyTerm> terms_;  // active terms only
  EntityList entities_;
  PhraseSet keywords_;
  PhraseSet entity_phrases_;
};

// One-shot form; only active taxonomy terms participate.
std::vector<ExtractionRecord> extract(const Document& doc, const Taxonomy& taxonomy,
                                      const EntityList& entities,
                                      std::size_t max_distance);

// Per-document cost model: m keywords with a mean of a instances each per
// document, n entities with b instances each.
struct CorpusStats {
  std::size_t m = 0;
  double a = 0.0;
  std::size_t n = 0;
  double b = 0.0;
  double comparisons_estimate = 0.0;  // (m*a) * (n*b)
};

CorpusStats corpus_stats(std::size_t keyword_terms, std::size_t entity_count,
                         std::size_t document_count,
                         std::uint64_t keyword_occurrences,
                         std::uint64_t entity_occurrences);

}  // namespace riskmine
