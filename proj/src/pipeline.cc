#include "riskmine/pipeline.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"

#include "riskmine/error.h"
#include "riskmine/random.h"

namespace riskmine {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void require(const fs::path& p, const char* what) {
  if (p.empty()) throw Error(Errc::kInvalidConfig, std::string("missing --") + what);
}

// Writes via a sibling temp file and renames, so readers never see a
// truncated output.
template <typename Fn>
void write_atomically(const fs::path& path, Fn&& fill) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  try {
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error(Errc::kIo, "cannot write " + tmp.string());
      fill(out);
      out.flush();
      if (!out) throw Error(Errc::kIo, "write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw;
  }
}

ordered_json embedding_json(const EmbeddingConfig& c) {
  ordered_json j;
  j["dim"] = c.dim;
  j["window"] = c.window;
  j["negatives"] = c.negatives;
  j["min_count"] = c.min_count;
  j["ngram_min"] = c.ngram_min;
  j["ngram_max"] = c.ngram_max;
  j["bucket_count"] = c.bucket_count;
  j["epochs"] = c.epochs;
  j["learning_rate"] = c.learning_rate;
  j["rng_seed"] = c.rng_seed;
  return j;
}

ordered_json config_json(const PipelineConfig& c) {
  ordered_json j;
  j["corpus"] = c.corpus_path.generic_string();
  j["taxonomy"] = c.taxonomy_path.generic_string();
  j["entities"] = c.entities_path.generic_string();
  j["out"] = c.output_dir.generic_string();
  j["cutoff"] = c.cutoff;
  j["top_k"] = c.top_k;
  j["seed"] = c.rng_seed;
  j["jobs"] = c.jobs;
  j["deterministic"] = c.deterministic;
  if (!c.lemma_exceptions_path.empty())
    j["lemma_exceptions"] = c.lemma_exceptions_path.generic_string();
  if (!c.abbreviations_path.empty())
    j["abbreviations"] = c.abbreviations_path.generic_string();
  j["embedding"] = embedding_json(c.embedding);
  return j;
}

ordered_json stats_json(const CorpusStats& s) {
  ordered_json j;
  j["m"] = s.m;
  j["a"] = s.a;
  j["n"] = s.n;
  j["b"] = s.b;
  j["comparisons_estimate"] = s.comparisons_estimate;
  return j;
}

void process_one_unchecked(const Extractor& extractor, const Ingestor& ingestor,
                           const RawDocument& raw, std::size_t cutoff, std::uint64_t seed,
                           DocumentResult& result) {
  const Document doc = ingestor.ingest(raw);
  const auto kw = extractor.keyword_occurrences(doc);
  const auto ent = extractor.entity_occurrences(doc);
  result.keyword_occurrences = kw.size();
  result.entity_occurrences = ent.size();
  result.records = extractor.extract(doc, cutoff);
  for (std::size_t i = 0; i < result.records.size(); ++i) {
    auto& r = result.records[i];
    const auto draw =
        sample_baseline(doc, derive_seed(seed, "baseline/" + doc.doc_id + "/" + std::to_string(i)));
    r.baseline_text = draw.text;
    r.baseline_coincides = draw.sentence >= r.first_sentence && draw.sentence <= r.last_sentence;
  }
}

void process_one(const Extractor& extractor, const Ingestor& ingestor, const RawDocument& raw,
                 std::size_t cutoff, std::uint64_t seed, DocumentResult& result) {
  try {
    process_one_unchecked(extractor, ingestor, raw, cutoff, seed, result);
  } catch (const Error& e) {
    throw Error(e.code(), "document '" + raw.doc_id + "': " + e.what());
  }
}

struct LoadedInputs {
  Ingestor ingestor;
  Taxonomy taxonomy;
  EntityList entities;
};

LoadedInputs load_inputs(const PipelineConfig& config) {
  require(config.taxonomy_path, "taxonomy");
  require(config.entities_path, "entities");
  LoadedInputs in{config.make_ingestor(), {}, {}};
  in.taxonomy = load_taxonomy(config.taxonomy_path, in.ingestor);
  in.entities = load_entities(config.entities_path, in.ingestor);
  return in;
}

std::size_t get_size(const nlohmann::json& j, const char* key) {
  return j.at(key).get<std::size_t>();
}

}  // namespace

void PipelineConfig::validate() const {
  if (jobs < 1) throw Error(Errc::kInvalidConfig, "--jobs must be >= 1");
  if (top_k < 1) throw Error(Errc::kInvalidConfig, "--top-k must be >= 1");
  embedding.validate();
}

Ingestor PipelineConfig::make_ingestor() const {
  Lemmatizer lem = lemma_exceptions_path.empty() ? Lemmatizer()
                                                 : Lemmatizer::from_file(lemma_exceptions_path);
  Sentencizer sent = abbreviations_path.empty() ? Sentencizer()
                                                : Sentencizer::from_file(abbreviations_path);
  return Ingestor(std::move(lem), std::move(sent));
}

fs::path PipelineConfig::vectors() const {
  return vectors_path.empty() ? output_dir / "vectors.txt" : vectors_path;
}

fs::path PipelineConfig::decisions_log() const {
  return decisions_log_path.empty() ? output_dir / "decisions.log" : decisions_log_path;
}

std::vector<DocumentResult> process_documents(const Extractor& extractor, const Ingestor& ingestor,
                                              std::span<const RawDocument> docs,
                                              std::size_t cutoff, std::uint64_t seed, int jobs) {
  std::vector<DocumentResult> results(docs.size());
  const auto n = static_cast<std::ptrdiff_t>(docs.size());
  std::exception_ptr failure;
#pragma omp parallel for num_threads(std::max(jobs, 1)) schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      process_one(extractor, ingestor, docs[i], cutoff, seed, results[i]);
    } catch (...) {
#pragma omp critical(riskmine_process_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

std::vector<DocumentResult> process_documents_serial(const Extractor& extractor,
                                                     const Ingestor& ingestor,
                                                     std::span<const RawDocument> docs,
                                                     std::size_t cutoff, std::uint64_t seed) {
  std::vector<DocumentResult> results(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i)
    process_one(extractor, ingestor, docs[i], cutoff, seed, results[i]);
  return results;
}

std::vector<Document> ingest_documents(const Ingestor& ingestor, std::span<const RawDocument> docs,
                                       int jobs) {
  std::vector<Document> out(docs.size());
  const auto n = static_cast<std::ptrdiff_t>(docs.size());
  std::exception_ptr failure;
#pragma omp parallel for num_threads(std::max(jobs, 1)) schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[i] = ingestor.ingest(docs[i]);
    } catch (...) {
#pragma omp critical(riskmine_ingest_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::string corpus_fingerprint(std::span<const RawDocument> docs) {
  std::vector<const RawDocument*> sorted;
  sorted.reserve(docs.size());
  for (const auto& d : docs) sorted.push_back(&d);
  std::sort(sorted.begin(), sorted.end(),
            [](const RawDocument* a, const RawDocument* b) { return a->doc_id < b->doc_id; });
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    h ^= 0xff;  // field separator outside UTF-8
    h *= 0x100000001b3ULL;
  };
  for (const auto* d : sorted) {
    mix(d->doc_id);
    mix(d->text);
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string record_to_json(const ExtractionRecord& r) {
  ordered_json j;
  j["doc_id"] = r.doc_id;
  j["category"] = r.category;
  j["keyword"] = r.keyword;
  j["entity"] = r.entity;
  j["distance"] = r.distance;
  j["scope"] = to_string(r.scope);
  j["sentence_span"] = {r.first_sentence, r.last_sentence};
  j["span_text"] = r.span_text;
  j["keyword_tokens"] = {r.keyword_start, r.keyword_end};
  j["entity_tokens"] = {r.entity_start, r.entity_end};
  j["provenance"] = to_string(r.provenance);
  if (r.baseline_text) {
    j["baseline_text"] = *r.baseline_text;
    j["baseline_coincides"] = r.baseline_coincides;
  }
  return j.dump();
}

ExtractionRecord record_from_json(const std::string& line, const std::string& where) {
  try {
    const auto j = nlohmann::json::parse(line);
    ExtractionRecord r;
    r.doc_id = j.at("doc_id").get<std::string>();
    r.category = j.at("category").get<std::string>();
    r.keyword = j.at("keyword").get<std::string>();
    r.entity = j.at("entity").get<std::string>();
    r.distance = get_size(j, "distance");
    const auto scope = j.at("scope").get<std::string>();
    if (scope == to_string(Scope::kSameSentence)) {
      r.scope = Scope::kSameSentence;
    } else if (scope == to_string(Scope::kMultiSentence)) {
      r.scope = Scope::kMultiSentence;
    } else {
      throw Error(Errc::kParse, "unknown scope '" + scope + "'");
    }
    const auto& span = j.at("sentence_span");
    r.first_sentence = span.at(0).get<std::size_t>();
    r.last_sentence = span.at(1).get<std::size_t>();
    r.span_text = j.at("span_text").get<std::string>();
    if (j.contains("keyword_tokens")) {
      r.keyword_start = j["keyword_tokens"].at(0).get<std::size_t>();
      r.keyword_end = j["keyword_tokens"].at(1).get<std::size_t>();
    }
    if (j.contains("entity_tokens")) {
      r.entity_start = j["entity_tokens"].at(0).get<std::size_t>();
      r.entity_end = j["entity_tokens"].at(1).get<std::size_t>();
    }
    if (j.contains("provenance")) {
      const auto p = j["provenance"].get<std::string>();
      if (p == to_string(Provenance::kSeed)) {
        r.provenance = Provenance::kSeed;
      } else if (p == to_string(Provenance::kExpanded)) {
        r.provenance = Provenance::kExpanded;
      } else {
        throw Error(Errc::kParse, "unknown provenance '" + p + "'");
      }
    }
    if (j.contains("baseline_text")) {
      r.baseline_text = j["baseline_text"].get<std::string>();
      r.baseline_coincides = j.value("baseline_coincides", false);
    }
    return r;
  } catch (const Error& e) {
    throw Error(Errc::kParse, where + ": " + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kParse, where + ": " + e.what());
  }
}

std::vector<ExtractionRecord> read_records(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kIo, "cannot open extractions " + path.string());
  std::vector<ExtractionRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(record_from_json(line, path.string() + ":" + std::to_string(line_no)));
  }
  return out;
}

ExtractSummary cmd_extract(const PipelineConfig& config) {
  config.validate();
  require(config.corpus_path, "corpus");
  const auto t0 = Clock::now();
  const LoadedInputs inputs = load_inputs(config);
  const Extractor extractor(inputs.taxonomy, inputs.entities);
  const auto docs = read_corpus(config.corpus_path);
  const double load_seconds = seconds_since(t0);

  ExtractSummary summary;
  summary.documents = docs.size();
  summary.extractions_path = config.output_dir / "extractions.jsonl";
  summary.manifest_path = config.output_dir / "manifest.json";

  // Documents go through in batches so memory stays bounded by one batch of
  // records; batch order is doc_id order, so the output stays sorted.
  constexpr std::size_t kBatch = 4096;
  std::uint64_t kw_total = 0;
  std::uint64_t ent_total = 0;
  const auto t1 = Clock::now();
  write_atomically(summary.extractions_path, [&](std::ostream& out) {
    const std::span<const RawDocument> all(docs);
    for (std::size_t begin = 0; begin < all.size(); begin += kBatch) {
      const auto batch = all.subspan(begin, std::min(kBatch, all.size() - begin));
      auto results =
          process_documents(extractor, inputs.ingestor, batch, config.cutoff, config.rng_seed,
                            config.jobs);
      for (auto& res : results) {
        kw_total += res.keyword_occurrences;
        ent_total += res.entity_occurrences;
        for (const auto& r : res.records) {
          out << record_to_json(r) << '\n';
          ++summary.records;
          ++summary.by_scope[std::string(to_string(r.scope))];
          ++summary.by_category[r.category];
        }
      }
    }
  });
  const double extract_seconds = seconds_since(t1);

  summary.stats = corpus_stats(extractor.keyword_phrases().size(), inputs.entities.size(),
                               docs.size(), kw_total, ent_total);

  ordered_json manifest;
  manifest["command"] = "extract";
  manifest["config"] = config_json(config);
  manifest["corpus_fingerprint"] = corpus_fingerprint(docs);
  manifest["documents"] = docs.size();
  manifest["records"] = summary.records;
  manifest["records_by_scope"] = summary.by_scope;
  manifest["records_by_category"] = summary.by_category;
  manifest["keyword_occurrences"] = kw_total;
  manifest["entity_occurrences"] = ent_total;
  manifest["corpus_stats"] = stats_json(summary.stats);
  manifest["timings_seconds"] = {{"load", load_seconds}, {"extract", extract_seconds}};
  write_atomically(summary.manifest_path,
                   [&](std::ostream& out) { out << manifest.dump(2) << '\n'; });
  return summary;
}

TrainSummary cmd_train(const PipelineConfig& config) {
  config.validate();
  require(config.corpus_path, "corpus");
  const Ingestor ingestor = config.make_ingestor();
  std::optional<Taxonomy> taxonomy;
  if (!config.taxonomy_path.empty()) taxonomy = load_taxonomy(config.taxonomy_path, ingestor);
  const auto docs = read_corpus(config.corpus_path);
  const auto t0 = Clock::now();
  const auto ingested = ingest_documents(ingestor, docs, config.jobs);
  const auto corpus = training_corpus(ingested, taxonomy ? &*taxonomy : nullptr);

  TrainOptions options;
  options.deterministic = config.deterministic;
  options.jobs = config.deterministic ? 1 : config.jobs;
  TrainStats stats;
  const auto model = train_skipgram(corpus, config.embedding, options, &stats);
  const double train_seconds = seconds_since(t0);
  const auto vectors = WordVectors::from_model(model);

  TrainSummary summary;
  summary.vocab_size = model.vocab().size();
  summary.epoch_mean_loss = stats.epoch_mean_loss;
  summary.vectors_path = config.vectors();
  summary.metadata_path = summary.vectors_path;
  summary.metadata_path.replace_extension(".json");
  write_atomically(summary.vectors_path, [&](std::ostream& out) { out << vectors.to_text(); });

  ordered_json meta;
  meta["command"] = "train";
  meta["config"] = config_json(config);
  meta["mode"] = options.deterministic ? "deterministic" : "parallel";
  meta["threads"] = options.jobs;
  meta["corpus_fingerprint"] = corpus_fingerprint(docs);
  meta["documents"] = docs.size();
  meta["vocab_size"] = summary.vocab_size;
  meta["input_rows"] = model.input_row_count();
  meta["updates"] = stats.updates;
  meta["epoch_mean_loss"] = stats.epoch_mean_loss;
  meta["train_seconds"] = train_seconds;
  write_atomically(summary.metadata_path,
                   [&](std::ostream& out) { out << meta.dump(2) << '\n'; });
  return summary;
}

ExpandSummary cmd_expand(const PipelineConfig& config) {
  config.validate();
  require(config.taxonomy_path, "taxonomy");
  const Ingestor ingestor = config.make_ingestor();
  const Taxonomy before = load_taxonomy(config.taxonomy_path, ingestor);
  const auto vectors = WordVectors::load(config.vectors());
  const auto expansion = expand_taxonomy(vectors, before, config.top_k, config.jobs);

  Taxonomy after = merge_expansion(before, expansion.candidates, ingestor);
  apply_decisions(after, read_decisions(config.decisions_log()), ingestor);

  ExpandSummary summary;
  summary.candidates_proposed = expansion.candidates.size();
  summary.candidates_added = after.terms().size() - before.terms().size();
  summary.skipped = expansion.skipped;
  summary.report = expansion_report(before, after);
  summary.taxonomy_path = config.output_dir / "taxonomy.expanded.tsv";

  save_taxonomy(summary.taxonomy_path, after);
  write_atomically(config.output_dir / "expansion_skipped.tsv", [&](std::ostream& out) {
    out << "# active terms without a vector: category<TAB>term\n";
    for (const auto& id : expansion.skipped) out << id.category << '\t' << id.term << '\n';
  });

  ordered_json report;
  report["candidates_proposed"] = summary.candidates_proposed;
  report["candidates_added"] = summary.candidates_added;
  report["skipped_terms"] = expansion.skipped.size();
  report["average_percent"] = summary.report.average_percent;
  ordered_json cats = ordered_json::array();
  for (const auto& c : summary.report.categories)
    cats.push_back({{"category", c.category},
                    {"before", c.before},
                    {"after", c.after},
                    {"percent", c.percent}});
  report["categories"] = std::move(cats);
  write_atomically(config.output_dir / "expansion_report.json",
                   [&](std::ostream& out) { out << report.dump(2) << '\n'; });
  return summary;
}

namespace {

// Up to `limit` sentences of the corpus containing the term.
std::vector<std::string> term_contexts(const std::vector<Document>& docs,
                                       const TaxonomyTerm& term, std::size_t limit) {
  std::vector<std::string> out;
  if (limit == 0) return out;
  PhraseSet phrases;
  phrases.add(term.lemma_tokens, 0);
  for (const auto& doc : docs) {
    for (const auto& occ : find_occurrences(doc, phrases)) {
      const auto& s = doc.sentences[doc.sentence_of(occ.start)];
      const std::size_t b = doc.tokens[s.begin].char_start;
      const std::size_t e = doc.tokens[s.end - 1].char_end;
      out.push_back(doc.doc_id + ": " + doc.text.substr(b, e - b));
      if (out.size() >= limit) return out;
    }
  }
  return out;
}

}  // namespace

CurateSummary cmd_curate(const PipelineConfig& config, const fs::path& decisions_file,
                         std::istream& in, std::ostream& out) {
  config.validate();
  require(config.taxonomy_path, "taxonomy");
  const Ingestor ingestor = config.make_ingestor();
  Taxonomy taxonomy = load_taxonomy(config.taxonomy_path, ingestor);
  const fs::path log = config.decisions_log();
  if (log.has_parent_path()) fs::create_directories(log.parent_path());

  CurateSummary summary;
  auto record = [&](const TermId& id, Decision d) {
    taxonomy = curate(taxonomy, id, d, ingestor);
    append_decision(log, {id.term, id.category, d, {}});
    ++(d == Decision::kAccept ? summary.accepted : summary.rejected);
  };

  if (!decisions_file.empty()) {
    for (const auto& d : read_decisions(decisions_file)) record({d.category, d.term}, d.decision);
  } else {
    std::vector<Document> docs;
    if (!config.corpus_path.empty())
      docs = ingest_documents(ingestor, read_corpus(config.corpus_path), config.jobs);
    std::vector<TaxonomyTerm> pending;
    for (const auto& t : taxonomy.terms())
      if (t.status == TermStatus::kCandidate) pending.push_back(t);
    std::size_t index = 0;
    for (; index < pending.size(); ++index) {
      const auto& t = pending[index];
      out << "\n[" << index + 1 << "/" << pending.size() << "] " << t.term << "  (category "
          << t.category;
      if (t.source_term) out << ", from " << *t.source_term;
      if (t.score) out << ", score " << *t.score;
      out << ")\n";
      for (const auto& c : term_contexts(docs, t, 3)) out << "    " << c << '\n';
      std::string answer;
      for (;;) {
        out << "accept / reject / skip / quit [a/r/s/q]? " << std::flush;
        if (!std::getline(in, answer)) answer = "q";
        answer = ascii_lower(answer);
        if (answer == "a" || answer == "r" || answer == "s" || answer == "q") break;
      }
      if (answer == "q") break;
      if (answer == "s") {
        ++summary.skipped;
      } else {
        record({t.category, t.term}, answer == "a" ? Decision::kAccept : Decision::kReject);
      }
    }
    summary.skipped += pending.size() - std::min(index, pending.size());
  }

  summary.taxonomy_path = config.output_dir / "taxonomy.curated.tsv";
  save_taxonomy(summary.taxonomy_path, taxonomy);
  return summary;
}

PairsSummary cmd_eval_pairs(const PipelineConfig& config, const fs::path& extractions_path) {
  const auto records = read_records(extractions_path);
  std::map<std::string, std::vector<ExtractionRecord>> by_set;
  for (const auto& r : records)
    by_set[r.provenance == Provenance::kSeed ? "seed" : "expanded"].push_back(r);

  PairsSummary summary;
  std::vector<EvaluationPair> pairs;
  for (const auto& [set, recs] : by_set) {
    for (PairScheme scheme :
         {PairScheme::kSingleVsBase, PairScheme::kMultiVsBase, PairScheme::kSingleVsMulti}) {
      const std::string label = set + "/" + std::string(to_string(scheme));
      try {
        auto result = build_pairs(recs, scheme,
                                  derive_seed(config.rng_seed, "pairs/" + label), set);
        summary.by_comparison[label] = result.pairs.size();
        for (auto& p : result.pairs) pairs.push_back(std::move(p));
      } catch (const Error& e) {
        if (e.code() != Errc::kInsufficientRecords) throw;
        summary.by_comparison[label] = 0;
      }
    }
  }
  if (pairs.empty())
    throw Error(Errc::kInsufficientRecords, "no comparison has records on both sides");
  summary.pairs = pairs.size();
  summary.pairs_path = config.output_dir / "pairs.jsonl";
  write_atomically(summary.pairs_path, [&](std::ostream& out) { write_pairs(out, pairs); });
  return summary;
}

EvalReport cmd_eval(const PipelineConfig& config, const fs::path& pairs_path,
                    const fs::path& judgments_path) {
  const auto pairs = read_pairs(pairs_path);
  const auto judgments = read_judgments(judgments_path);
  auto report = evaluate(pairs, judgments);
  write_atomically(config.output_dir / "report.json",
                   [&](std::ostream& out) { out << report_to_json(report) << '\n'; });
  return report;
}

CorpusStats cmd_stats(const PipelineConfig& config) {
  config.validate();
  require(config.corpus_path, "corpus");
  const LoadedInputs inputs = load_inputs(config);
  const Extractor extractor(inputs.taxonomy, inputs.entities);
  const auto docs = read_corpus(config.corpus_path);
  std::uint64_t kw = 0;
  std::uint64_t ent = 0;
  const auto n = static_cast<std::ptrdiff_t>(docs.size());
  std::exception_ptr failure;
#pragma omp parallel for num_threads(config.jobs) reduction(+ : kw, ent) schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      const Document doc = inputs.ingestor.ingest(docs[i]);
      kw += extractor.keyword_occurrences(doc).size();
      ent += extractor.entity_occurrences(doc).size();
    } catch (...) {
#pragma omp critical(riskmine_stats_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return corpus_stats(extractor.keyword_phrases().size(), inputs.entities.size(), docs.size(), kw,
                      ent);
}

}  // namespace riskmine
