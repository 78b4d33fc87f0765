#include "riskmine/matcher.h"

#include <algorithm>
#include <tuple>

namespace riskmine {

std::string_view to_string(Scope s) {
  return s == Scope::kSameSentence ? "same_sentence" : "multi_sentence";
}

std::size_t PhraseSet::add(std::vector<std::string> lemmas, std::size_t owner) {
  const std::size_t id = phrases_.size();
  if (!lemmas.empty()) by_first_[lemmas.front()].push_back(id);
  phrases_.push_back(std::move(lemmas));
  owners_.push_back(owner);
  return id;
}

const std::vector<std::size_t>* PhraseSet::starting_with(const std::string& lemma) const {
  auto it = by_first_.find(lemma);
  return it == by_first_.end() ? nullptr : &it->second;
}

namespace {

auto occurrence_key(const Occurrence& o) {
  return std::tie(o.start, o.end, o.phrase);
}

}  // namespace

std::vector<Occurrence> find_occurrences(const Document& doc, const PhraseSet& phrases) {
  std::vector<Occurrence> out;
  if (phrases.size() == 0) return out;
  std::vector<std::size_t> next_free(phrases.size(), 0);
  const auto& tokens = doc.tokens;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto* ids = phrases.starting_with(tokens[i].lemma);
    if (ids == nullptr) continue;
    for (std::size_t id : *ids) {
      if (i < next_free[id]) continue;
      const auto& lemmas = phrases.lemmas(id);
      if (i + lemmas.size() > tokens.size()) continue;
      bool hit = true;
      for (std::size_t k = 1; k < lemmas.size(); ++k) {
        if (tokens[i + k].lemma != lemmas[k]) {
          hit = false;
          break;
        }
      }
      if (!hit) continue;
      out.push_back({id, phrases.owner(id), i, i + lemmas.size()});
      next_free[id] = i + lemmas.size();
    }
  }
  std::sort(out.begin(), out.end(), [](const Occurrence& a, const Occurrence& b) {
    return occurrence_key(a) < occurrence_key(b);
  });
  return out;
}

std::size_t token_distance(const Occurrence& a, const Occurrence& b) {
  if (a.end <= b.start) return b.start - a.end;
  if (b.end <= a.start) return a.start - b.end;
  return 0;
}

std::vector<Match> pair_nearest(const std::vector<Occurrence>& keyword_occs,
                                const std::vector<Occurrence>& entity_occs,
                                MatchCounters* counters) {
  std::vector<Match> out;
  const std::size_t n = entity_occs.size();
  if (n == 0) return out;
  out.reserve(keyword_occs.size());

  // Running maximum of entity ends in start order; monotone, so it can be
  // binary searched for the first entity reaching a given end position.
  std::vector<std::size_t> max_end(n);
  for (std::size_t i = 0; i < n; ++i) {
    max_end[i] = i == 0 ? entity_occs[0].end : std::max(max_end[i - 1], entity_occs[i].end);
  }

  std::uint64_t probes = 0;
  for (const Occurrence& kw : keyword_occs) {
    // Entities in [0, split) start before the keyword ends: they precede or
    // overlap it. Entities in [split, n) follow it.
    std::size_t lo = 0, hi = n;
    while (lo < hi) {
      const std::size_t mid = lo + (hi - lo) / 2;
      ++probes;
      if (entity_occs[mid].start < kw.end) {
        lo = mid + 1;
      } else {
        hi = mid;
      }
    }
    const std::size_t split = lo;

    std::size_t best = n;
    std::size_t best_distance = 0;
    if (split > 0) {
      const std::size_t reach = std::min(kw.start, max_end[split - 1]);
      std::size_t l = 0, h = split - 1;
      while (l < h) {
        const std::size_t mid = l + (h - l) / 2;
        ++probes;
        if (max_end[mid] >= reach) {
          h = mid;
        } else {
          l = mid + 1;
        }
      }
      best = l;
      best_distance = kw.start - reach;
    }
    if (split < n) {
      ++probes;
      const std::size_t d = entity_occs[split].start - kw.end;
      if (best == n || d < best_distance) {
        best = split;
        best_distance = d;
      }
    }
    out.push_back({kw, entity_occs[best], best_distance, Scope::kSameSentence});
  }
  if (counters != nullptr) counters->probes += probes;
  return out;
}

std::vector<Match> filter_by_cutoff(const std::vector<Match>& matches,
                                    std::size_t max_distance) {
  std::vector<Match> out;
  std::copy_if(matches.begin(), matches.end(), std::back_inserter(out),
               [&](const Match& m) { return m.distance <= max_distance; });
  return out;
}

Scope classify_scope(const Match& match, const Document& doc) {
  const std::size_t first = std::min(match.keyword.start, match.entity.start);
  const std::size_t last = std::max(match.keyword.end, match.entity.end) - 1;
  return doc.sentence_of(first) == doc.sentence_of(last) ? Scope::kSameSentence
                                                         : Scope::kMultiSentence;
}

SentenceSpan retrieve_span(const Match& match, const Document& doc) {
  SentenceSpan span;
  const std::size_t first = std::min(match.keyword.start, match.entity.start);
  const std::size_t last = std::max(match.keyword.end, match.entity.end) - 1;
  span.first_sentence = doc.sentence_of(first);
  span.last_sentence = doc.sentence_of(last);
  const std::size_t begin_tok = doc.sentences[span.first_sentence].begin;
  const std::size_t end_tok = doc.sentences[span.last_sentence].end - 1;
  const std::size_t begin = doc.tokens[begin_tok].char_start;
  const std::size_t end = doc.tokens[end_tok].char_end;
  span.text = doc.text.substr(begin, end - begin);
  return span;
}

// ---------------------------------------------------------------------------

Extractor::Extractor(const Taxonomy& taxonomy, const EntityList& entities)
    : entities_(entities) {
  for (const TaxonomyTerm* term : taxonomy.active_terms()) {
    keywords_.add(term->lemma_tokens, terms_.size());
    terms_.push_back(*term);
  }
  for (std::size_t e = 0; e < entities_.entities.size(); ++e) {
    for (const auto& lemmas : entities_.entities[e].alias_lemmas) {
      entity_phrases_.add(lemmas, e);
    }
  }
}

std::vector<ExtractionRecord> Extractor::extract(const Document& doc,
                                                 std::size_t max_distance,
                                                 MatchCounters* counters) const {
  std::vector<ExtractionRecord> records;
  const auto entity_occs = entity_occurrences(doc);
  if (entity_occs.empty()) return records;
  const auto keyword_occs = keyword_occurrences(doc);
  if (keyword_occs.empty()) return records;

  auto matches = filter_by_cutoff(pair_nearest(keyword_occs, entity_occs, counters),
                                  max_distance);
  std::sort(matches.begin(), matches.end(), [](const Match& a, const Match& b) {
    return std::tie(a.keyword.start, a.entity.start, a.keyword.end, a.keyword.phrase,
                    a.entity.end, a.entity.phrase) <
           std::tie(b.keyword.start, b.entity.start, b.keyword.end, b.keyword.phrase,
                    b.entity.end, b.entity.phrase);
  });

  records.reserve(matches.size());
  for (Match& m : matches) {
    m.scope = classify_scope(m, doc);
    SentenceSpan span = retrieve_span(m, doc);
    const TaxonomyTerm& term = terms_[m.keyword.owner];
    ExtractionRecord r;
    r.doc_id = doc.doc_id;
    r.category = term.category;
    r.keyword = term.term;
    r.entity = entities_.entities[m.entity.owner].canonical_name;
    r.provenance = term.provenance;
    r.distance = m.distance;
    r.scope = m.scope;
    r.first_sentence = span.first_sentence;
    r.last_sentence = span.last_sentence;
    r.span_text = std::move(span.text);
    r.keyword_start = m.keyword.start;
    r.keyword_end = m.keyword.end;
    r.entity_start = m.entity.start;
    r.entity_end = m.entity.end;
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<ExtractionRecord> extract(const Document& doc, const Taxonomy& taxonomy,
                                      const EntityList& entities,
                                      std::size_t max_distance) {
  return Extractor(taxonomy, entities).extract(doc, max_distance);
}

CorpusStats corpus_stats(std::size_t keyword_terms, std::size_t entity_count,
                         std::size_t document_count,
                         std::uint64_t keyword_occurrences,
                         std::uint64_t entity_occurrences) {
  CorpusStats s;
  s.m = keyword_terms;
  s.n = entity_count;
  if (document_count > 0 && keyword_terms > 0) {
    s.a = static_cast<double>(keyword_occurrences) /
          (static_cast<double>(document_count) * static_cast<double>(keyword_terms));
  }
  if (document_count > 0 && entity_count > 0) {
    s.b = static_cast<double>(entity_occurrences) /
          (static_cast<double>(document_count) * static_cast<double>(entity_count));
  }
  s.comparisons_estimate = (static_cast<double>(s.m) * s.a) * (static_cast<double>(s.n) * s.b);
  return s;
}

}  // namespace riskmine
