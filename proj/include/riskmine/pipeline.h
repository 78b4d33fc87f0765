#pragma once

// End-to-end orchestration behind the riskmine command line: document
// fan-out, file outputs and run manifests.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "riskmine/embeddings.h"
#include "riskmine/evalkit.h"
#include "riskmine/matcher.h"
#include "riskmine/taxonomy.h"
#include "riskmine/text.h"

namespace riskmine {

struct PipelineConfig {
  std::filesystem::path corpus_path;
  std::filesystem::path taxonomy_path;
  std::filesystem::path entities_path;
  std::filesystem::path output_dir = ".";
  std::filesystem::path vectors_path;        // defaults to <out>/vectors.txt
  std::filesystem::path decisions_log_path;  // defaults to <out>/decisions.log
  std::filesystem::path lemma_exceptions_path;
  std::filesystem::path abbreviations_path;
  std::size_t cutoff = 100;
  std::size_t top_k = 10;
  std::uint64_t rng_seed = 1;
  int jobs = 1;
  bool deterministic = false;
  EmbeddingConfig embedding;

  // Throws kInvalidConfig.
  void validate() const;
  Ingestor make_ingestor() const;
  std::filesystem::path vectors() const;
  std::filesystem::path decisions_log() const;
};

struct DocumentResult {
  std::vector<ExtractionRecord> records;
  std::uint64_t keyword_occurrences = 0;
  std::uint64_t entity_occurrences = 0;
};

// Ingest + extract + baseline sampling for each document, fanned out over
// `jobs` OpenMP threads. Output slot i belongs to docs[i], so the result is
// independent of the thread count.
std::vector<DocumentResult> process_documents(const Extractor& extractor, const Ingestor& ingestor,
                                              std::span<const RawDocument> docs,
                                              std::size_t cutoff, std::uint64_t seed, int jobs);
// Single-threaded reference for process_documents.
std::vector<DocumentResult> process_documents_serial(const Extractor& extractor,
                                                     const Ingestor& ingestor,
                                                     std::span<const RawDocument> docs,
                                                     std::size_t cutoff, std::uint64_t seed);

// Ingests documents over `jobs` threads.
std::vector<Document> ingest_documents(const Ingestor& ingestor, std::span<const RawDocument> docs,
                                       int jobs);

// Content hash (FNV-1a 64, hex) over doc ids and texts in doc_id order.
std::string corpus_fingerprint(std::span<const RawDocument> docs);

// JSON-lines record format. Leading fields, in order: doc_id, category,
// keyword, entity, distance, scope, sentence_span, span_text.
std::string record_to_json(const ExtractionRecord& record);
ExtractionRecord record_from_json(const std::string& line, const std::string& where);
std::vector<ExtractionRecord> read_records(const std::filesystem::path& path);

struct ExtractSummary {
  std::size_t documents = 0;
  std::size_t records = 0;
  std::map<std::string, std::size_t> by_scope;
  std::map<std::string, std::size_t> by_category;
  CorpusStats stats;
  std::filesystem::path extractions_path;
  std::filesystem::path manifest_path;
};

// <out>/extractions.jsonl sorted by (doc_id, keyword start) and
// <out>/manifest.json. A partial output file is removed on failure.
ExtractSummary cmd_extract(const PipelineConfig& config);

struct TrainSummary {
  std::size_t vocab_size = 0;
  std::vector<double> epoch_mean_loss;
  std::filesystem::path vectors_path;
  std::filesystem::path metadata_path;
};

// Trains on the extraction corpus; writes the vector file and a JSON sidecar
// with the full config and corpus fingerprint.
TrainSummary cmd_train(const PipelineConfig& config);

struct ExpandSummary {
  std::size_t candidates_proposed = 0;
  std::size_t candidates_added = 0;
  std::vector<TermId> skipped;
  ExpansionReport report;
  std::filesystem::path taxonomy_path;
};

// Expansion + cleanup merge + replay of logged rejections. Writes
// <out>/taxonomy.expanded.tsv, <out>/expansion_skipped.tsv and
// <out>/expansion_report.json.
ExpandSummary cmd_expand(const PipelineConfig& config);

struct CurateSummary {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t skipped = 0;
  std::filesystem::path taxonomy_path;
};

// Batch mode when decisions_file is non-empty; otherwise prompts on `out`
// and reads a/r/s/q answers from `in`. Every decision is appended to the
// decisions log; the curated taxonomy goes to <out>/taxonomy.curated.tsv.
CurateSummary cmd_curate(const PipelineConfig& config,
                         const std::filesystem::path& decisions_file, std::istream& in,
                         std::ostream& out);

struct PairsSummary {
  std::size_t pairs = 0;
  std::map<std::string, std::size_t> by_comparison;  // "<set>/<scheme>"
  std::filesystem::path pairs_path;
};

// Builds the six evaluation pairings from an extractions file. Records of
// seed keywords form the seed set, records of expanded keywords the
// expanded set.
PairsSummary cmd_eval_pairs(const PipelineConfig& config,
                            const std::filesystem::path& extractions_path);

// Writes <out>/report.json and returns the report.
EvalReport cmd_eval(const PipelineConfig& config, const std::filesystem::path& pairs_path,
                    const std::filesystem::path& judgments_path);

CorpusStats cmd_stats(const PipelineConfig& config);

}  // namespace riskmine
