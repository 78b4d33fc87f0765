#include "riskmine/taxonomy.h"

#include <charconv>
#include <ctime>
#include <fstream>
#include <sstream>

#include "riskmine/error.h"

namespace riskmine {

namespace {

int status_rank(TermStatus s) {
  switch (s) {
    case TermStatus::kActive: return 3;
    case TermStatus::kRejected: return 2;
    case TermStatus::kCandidate: return 1;
  }
  return 0;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::vector<std::string> normalize_or_throw(const Ingestor& ingestor,
                                            const std::string& text,
                                            const std::string& where) {
  auto lemmas = ingestor.lemma_tokens(text);
  if (lemmas.empty()) {
    throw Error(Errc::kParse, where + ": term '" + text + "' has no tokens");
  }
  return lemmas;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string_view to_string(Provenance p) {
  return p == Provenance::kSeed ? "seed" : "expanded";
}

std::string_view to_string(TermStatus s) {
  switch (s) {
    case TermStatus::kActive: return "active";
    case TermStatus::kCandidate: return "candidate";
    case TermStatus::kRejected: return "rejected";
  }
  return "active";
}

std::string_view to_string(Decision d) {
  return d == Decision::kAccept ? "accept" : "reject";
}

// ---------------------------------------------------------------------------

std::vector<const TaxonomyTerm*> Taxonomy::active_terms() const {
  std::vector<const TaxonomyTerm*> out;
  for (const auto& t : terms_) {
    if (t.status == TermStatus::kActive) out.push_back(&t);
  }
  return out;
}

std::size_t Taxonomy::live_count(const std::string& category) const {
  std::size_t n = 0;
  for (const auto& t : terms_) {
    if (t.category == category && t.status != TermStatus::kRejected) ++n;
  }
  return n;
}

std::size_t Taxonomy::count(TermStatus status) const {
  std::size_t n = 0;
  for (const auto& t : terms_) n += t.status == status;
  return n;
}

const TaxonomyTerm* Taxonomy::find(const std::string& category,
                                   const std::vector<std::string>& lemma_tokens) const {
  auto it = index_.find({category, lemma_tokens});
  return it == index_.end() ? nullptr : &terms_[it->second];
}

bool Taxonomy::add(TaxonomyTerm term) {
  categories_.insert(term.category);
  auto key = std::make_pair(term.category, term.lemma_tokens);
  auto it = index_.find(key);
  if (it == index_.end()) {
    index_.emplace(std::move(key), terms_.size());
    terms_.push_back(std::move(term));
    return true;
  }
  TaxonomyTerm& existing = terms_[it->second];
  if (term.provenance == Provenance::kSeed) existing.provenance = Provenance::kSeed;
  if (status_rank(term.status) > status_rank(existing.status)) {
    existing.status = term.status;
  }
  if (!existing.source_term && term.source_term) {
    existing.source_term = std::move(term.source_term);
    existing.score = term.score;
  }
  return false;
}

bool Taxonomy::set_status(const std::string& category,
                          const std::vector<std::string>& lemma_tokens,
                          TermStatus status) {
  auto it = index_.find({category, lemma_tokens});
  if (it == index_.end()) return false;
  terms_[it->second].status = status;
  return true;
}

// ---------------------------------------------------------------------------

Taxonomy parse_taxonomy(std::istream& in, const std::string& name,
                        const Ingestor& ingestor) {
  Taxonomy taxonomy;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string trimmed = trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const std::string where = name + ":" + std::to_string(line_no);
    const auto fields = split(line, '\t');
    if (fields.size() != 4 && fields.size() != 6) {
      throw Error(Errc::kParse, where + ": expected 4 or 6 tab-separated fields, got " +
                                    std::to_string(fields.size()));
    }
    TaxonomyTerm term;
    term.category = trim(fields[0]);
    term.term = trim(fields[1]);
    if (term.category.empty() || term.term.empty()) {
      throw Error(Errc::kParse, where + ": empty category or term");
    }
    const std::string prov = trim(fields[2]);
    if (prov == "seed") {
      term.provenance = Provenance::kSeed;
    } else if (prov == "expanded") {
      term.provenance = Provenance::kExpanded;
    } else {
      throw Error(Errc::kParse, where + ": bad provenance '" + prov + "'");
    }
    const std::string status = trim(fields[3]);
    if (status == "active") {
      term.status = TermStatus::kActive;
    } else if (status == "candidate") {
      term.status = TermStatus::kCandidate;
    } else if (status == "rejected") {
      term.status = TermStatus::kRejected;
    } else {
      throw Error(Errc::kParse, where + ": bad status '" + status + "'");
    }
    if (fields.size() == 6) {
      term.source_term = trim(fields[4]);
      const std::string score = trim(fields[5]);
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(score.data(), score.data() + score.size(), v);
      if (ec != std::errc() || ptr != score.data() + score.size()) {
        throw Error(Errc::kParse, where + ": bad score '" + score + "'");
      }
      term.score = v;
    }
    term.lemma_tokens = normalize_or_throw(ingestor, term.term, where);
    taxonomy.add(std::move(term));
  }
  if (taxonomy.count(TermStatus::kActive) == 0) {
    throw Error(Errc::kEmptyTaxonomy, name + ": no active terms");
  }
  return taxonomy;
}

Taxonomy load_taxonomy(const std::filesystem::path& path, const Ingestor& ingestor) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kIo, "cannot open taxonomy " + path.string());
  return parse_taxonomy(in, path.string(), ingestor);
}

void write_taxonomy(std::ostream& out, const Taxonomy& taxonomy) {
  out << "# category\tterm\tprovenance\tstatus[\tsource_term\tscore]\n";
  for (const auto& t : taxonomy.terms()) {
    out << t.category << '\t' << t.term << '\t' << to_string(t.provenance) << '\t'
        << to_string(t.status);
    if (t.source_term) {
      out << '\t' << *t.source_term << '\t' << format_double(t.score.value_or(0.0));
    }
    out << '\n';
  }
}

void save_taxonomy(const std::filesystem::path& path, const Taxonomy& taxonomy) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::kIo, "cannot write " + path.string());
  write_taxonomy(out, taxonomy);
}

// ---------------------------------------------------------------------------

EntityList parse_entities(std::istream& in, const std::string& name,
                          const Ingestor& ingestor) {
  EntityList list;
  std::map<std::vector<std::string>, std::size_t> alias_owner;
  std::set<std::string> canonical;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string trimmed = trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const std::string where = name + ":" + std::to_string(line_no);
    Entity entity;
    for (const auto& raw : split(trimmed, '|')) {
      std::string alias = trim(raw);
      if (alias.empty()) throw Error(Errc::kParse, where + ": empty alias");
      auto lemmas = normalize_or_throw(ingestor, alias, where);
      auto [it, inserted] = alias_owner.emplace(lemmas, list.entities.size());
      if (!inserted) {
        if (it->second != list.entities.size()) {
          throw Error(Errc::kParse, where + ": alias '" + alias +
                                        "' already belongs to another entity");
        }
        continue;  // same entity, same normalized form
      }
      entity.aliases.push_back(std::move(alias));
      entity.alias_lemmas.push_back(std::move(lemmas));
    }
    entity.canonical_name = entity.aliases.front();
    if (!canonical.insert(entity.canonical_name).second) {
      throw Error(Errc::kParse, where + ": duplicate entity '" + entity.canonical_name + "'");
    }
    list.entities.push_back(std::move(entity));
  }
  if (list.entities.empty()) {
    throw Error(Errc::kEmptyEntityList, name + ": no entities");
  }
  return list;
}

EntityList load_entities(const std::filesystem::path& path, const Ingestor& ingestor) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kIo, "cannot open entities " + path.string());
  return parse_entities(in, path.string(), ingestor);
}

// ---------------------------------------------------------------------------

std::string punctuation_free_key(const std::vector<std::string>& lemma_tokens) {
  std::string key;
  for (const auto& tok : lemma_tokens) {
    for (char c : tok) {
      const auto u = static_cast<unsigned char>(c);
      if (u >= 0x80 || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) key += c;
    }
  }
  return key;
}

Taxonomy merge_expansion(const Taxonomy& taxonomy,
                         const std::vector<ExpansionCandidate>& candidates,
                         const Ingestor& ingestor) {
  Taxonomy out = taxonomy;
  std::set<std::pair<std::string, std::string>> loose_keys;
  for (const auto& t : out.terms()) {
    loose_keys.emplace(t.category, punctuation_free_key(t.lemma_tokens));
  }
  for (const auto& c : candidates) {
    std::string text = c.candidate;
    for (char& ch : text) {
      if (ch == '_') ch = ' ';
    }
    if (!contains_letter(text)) continue;
    auto lemmas = ingestor.lemma_tokens(text);
    if (lemmas.empty() || out.find(c.category, lemmas) != nullptr) continue;
    auto loose = std::make_pair(c.category, punctuation_free_key(lemmas));
    if (loose_keys.count(loose) > 0) continue;

    TaxonomyTerm term;
    term.term = trim(text);
    term.category = c.category;
    term.provenance = Provenance::kExpanded;
    term.status = TermStatus::kCandidate;
    term.lemma_tokens = std::move(lemmas);
    term.source_term = c.source_term;
    term.score = c.score;
    out.add(std::move(term));
    loose_keys.insert(std::move(loose));
  }
  return out;
}

Taxonomy curate(const Taxonomy& taxonomy, const TermId& id, Decision decision,
                const Ingestor& ingestor) {
  const auto lemmas = ingestor.lemma_tokens(id.term);
  const TaxonomyTerm* term = taxonomy.find(id.category, lemmas);
  if (term == nullptr) {
    throw Error(Errc::kUnknownTerm, id.category + "/" + id.term);
  }
  if (term->status != TermStatus::kCandidate) {
    throw Error(Errc::kNotACandidate,
                id.category + "/" + id.term + " is " + std::string(to_string(term->status)));
  }
  Taxonomy out = taxonomy;
  out.set_status(id.category, lemmas,
                 decision == Decision::kAccept ? TermStatus::kActive : TermStatus::kRejected);
  return out;
}

std::vector<CurationDecision> read_decisions(const std::filesystem::path& path) {
  std::vector<CurationDecision> out;
  std::ifstream in(path);
  if (!in) return out;  // no log yet
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string trimmed = trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const auto fields = split(line, '\t');
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (fields.size() < 3 || fields.size() > 4) {
      throw Error(Errc::kParse, where + ": expected term, category, decision[, timestamp]");
    }
    CurationDecision d;
    d.term = trim(fields[0]);
    d.category = trim(fields[1]);
    const std::string verdict = trim(fields[2]);
    if (verdict == "accept") {
      d.decision = Decision::kAccept;
    } else if (verdict == "reject") {
      d.decision = Decision::kReject;
    } else {
      throw Error(Errc::kParse, where + ": bad decision '" + verdict + "'");
    }
    if (fields.size() == 4) d.timestamp = trim(fields[3]);
    out.push_back(std::move(d));
  }
  return out;
}

void append_decision(const std::filesystem::path& path, const CurationDecision& d) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error(Errc::kIo, "cannot append to " + path.string());
  out << d.term << '\t' << d.category << '\t' << to_string(d.decision) << '\t'
      << (d.timestamp.empty() ? utc_timestamp() : d.timestamp) << '\n';
}

std::size_t apply_decisions(Taxonomy& taxonomy,
                            const std::vector<CurationDecision>& decisions,
                            const Ingestor& ingestor) {
  std::size_t applied = 0;
  for (const auto& d : decisions) {
    const auto lemmas = ingestor.lemma_tokens(d.term);
    const TaxonomyTerm* term = taxonomy.find(d.category, lemmas);
    if (term == nullptr || term->status != TermStatus::kCandidate) continue;
    taxonomy.set_status(d.category, lemmas,
                        d.decision == Decision::kAccept ? TermStatus::kActive
                                                        : TermStatus::kRejected);
    ++applied;
  }
  return applied;
}

// ---------------------------------------------------------------------------

ExpansionReport expansion_report_from_counts(const std::vector<CategoryIncrease>& counts) {
  ExpansionReport report;
  double sum = 0.0;
  for (CategoryIncrease c : counts) {
    if (c.before == 0) {
      throw Error(Errc::kDivisionByZero, "category '" + c.category + "' has no terms before expansion");
    }
    c.percent = 100.0 * (static_cast<double>(c.after) - static_cast<double>(c.before)) /
                static_cast<double>(c.before);
    sum += c.percent;
    report.categories.push_back(std::move(c));
  }
  if (!report.categories.empty()) {
    report.average_percent = sum / static_cast<double>(report.categories.size());
  }
  return report;
}

ExpansionReport expansion_report(const Taxonomy& before, const Taxonomy& after) {
  std::vector<CategoryIncrease> counts;
  for (const auto& category : before.categories()) {
    counts.push_back({category, before.live_count(category), after.live_count(category), 0.0});
  }
  return expansion_report_from_counts(counts);
}

}  // namespace riskmine
