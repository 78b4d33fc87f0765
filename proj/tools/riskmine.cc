// riskmine command line: extract, train, expand, curate, eval, stats.
//
// Exit status: 0 success, 1 usage error, 2 data or I/O error.

#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "riskmine/error.h"
#include "riskmine/pipeline.h"

namespace {

using riskmine::PipelineConfig;

void add_common(CLI::App* cmd, PipelineConfig& c) {
  cmd->add_option("--out", c.output_dir, "Output directory")->capture_default_str();
  cmd->add_option("--seed", c.rng_seed, "Random seed")->capture_default_str();
  cmd->add_option("--jobs", c.jobs, "Worker threads")->capture_default_str()->check(
      CLI::PositiveNumber);
  cmd->add_option("--lemma-exceptions", c.lemma_exceptions_path,
                  "Irregular form table replacing the built-in one");
  cmd->add_option("--abbreviations", c.abbreviations_path,
                  "Abbreviation list replacing the built-in one");
}

void add_embedding(CLI::App* cmd, riskmine::EmbeddingConfig& e) {
  cmd->add_option("--dim", e.dim)->capture_default_str();
  cmd->add_option("--window", e.window)->capture_default_str();
  cmd->add_option("--negatives", e.negatives)->capture_default_str();
  cmd->add_option("--min-count", e.min_count)->capture_default_str();
  cmd->add_option("--minn", e.ngram_min, "Shortest subword n-gram")->capture_default_str();
  cmd->add_option("--maxn", e.ngram_max, "Longest subword n-gram")->capture_default_str();
  cmd->add_option("--buckets", e.bucket_count, "Subword hash buckets")->capture_default_str();
  cmd->add_option("--epochs", e.epochs)->capture_default_str();
  cmd->add_option("--lr", e.learning_rate, "Initial learning rate")->capture_default_str();
}

void print_report(const riskmine::EvalReport& report) {
  for (const auto& c : report.comparisons) {
    std::printf("%-4s %-40s n=%zu", c.code.c_str(), c.description.c_str(), c.summary.total);
    if (c.test) std::printf("  chi2=%.3f p=%.3g", c.test->chi2, c.test->p);
    std::printf("\n");
  }
  if (report.kappa.empty()) {
    std::printf("kappa: unavailable (no doubly annotated pairs)\n");
  } else {
    for (const auto& k : report.kappa)
      std::printf("kappa %-20s items=%zu kappa=%.3f\n", k.category.c_str(), k.items, k.kappa);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entity risk relation mining"};
  app.require_subcommand(1);

  PipelineConfig config;
  std::filesystem::path decisions_file, extractions, pairs, judgments;

  auto* extract = app.add_subcommand("extract", "Extract keyword/entity risk records");
  extract->add_option("--corpus", config.corpus_path, "Directory of .txt files or JSONL")
      ->required();
  extract->add_option("--taxonomy", config.taxonomy_path, "Taxonomy TSV")->required();
  extract->add_option("--entities", config.entities_path, "Entity list")->required();
  extract->add_option("--cutoff", config.cutoff, "Maximum token distance")->capture_default_str();
  add_common(extract, config);

  auto* train = app.add_subcommand("train", "Train subword word vectors on the corpus");
  train->add_option("--corpus", config.corpus_path)->required();
  train->add_option("--taxonomy", config.taxonomy_path,
                    "Join multi-word terms into single training tokens");
  train->add_option("--vectors", config.vectors_path, "Vector file (default <out>/vectors.txt)");
  train->add_flag("--deterministic", config.deterministic,
                  "Single-threaded, byte-reproducible training");
  add_common(train, config);
  add_embedding(train, config.embedding);

  auto* expand = app.add_subcommand("expand", "Propose taxonomy terms by vector similarity");
  expand->add_option("--taxonomy", config.taxonomy_path)->required();
  expand->add_option("--vectors", config.vectors_path, "Vector file (default <out>/vectors.txt)");
  expand->add_option("--top-k", config.top_k, "Neighbours per term")->capture_default_str();
  expand->add_option("--decisions-log", config.decisions_log_path,
                     "Curation log replayed onto new candidates (default <out>/decisions.log)");
  add_common(expand, config);

  auto* curate = app.add_subcommand("curate", "Accept or reject candidate terms");
  curate->add_option("--taxonomy", config.taxonomy_path)->required();
  curate->add_option("--corpus", config.corpus_path, "Corpus for showing term contexts");
  curate->add_option("--decisions", decisions_file,
                     "Batch decisions (term<TAB>category<TAB>accept|reject)");
  curate->add_option("--decisions-log", config.decisions_log_path,
                     "Append-only log (default <out>/decisions.log)");
  add_common(curate, config);

  auto* eval = app.add_subcommand(
      "eval", "Build evaluation pairs, or score judgments when --judgments is given");
  eval->add_option("--extractions", extractions,
                   "Extraction records (default <out>/extractions.jsonl)");
  eval->add_option("--pairs", pairs, "Pairs file (default <out>/pairs.jsonl)");
  eval->add_option("--judgments", judgments, "Judgment CSV");
  add_common(eval, config);

  auto* stats = app.add_subcommand("stats", "Corpus cost model parameters");
  stats->add_option("--corpus", config.corpus_path)->required();
  stats->add_option("--taxonomy", config.taxonomy_path)->required();
  stats->add_option("--entities", config.entities_path)->required();
  add_common(stats, config);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*extract) {
      const auto s = riskmine::cmd_extract(config);
      std::printf("%zu documents, %zu records -> %s\n", s.documents, s.records,
                  s.extractions_path.string().c_str());
      for (const auto& [scope, n] : s.by_scope) std::printf("  %s: %zu\n", scope.c_str(), n);
    } else if (*train) {
      const auto s = riskmine::cmd_train(config);
      std::printf("vocabulary %zu words -> %s\n", s.vocab_size, s.vectors_path.string().c_str());
      for (std::size_t i = 0; i < s.epoch_mean_loss.size(); ++i)
        std::printf("  epoch %zu mean loss %.6f\n", i + 1, s.epoch_mean_loss[i]);
    } else if (*expand) {
      const auto s = riskmine::cmd_expand(config);
      std::printf("%zu candidates proposed, %zu added, %zu terms without vectors -> %s\n",
                  s.candidates_proposed, s.candidates_added, s.skipped.size(),
                  s.taxonomy_path.string().c_str());
      for (const auto& c : s.report.categories)
        std::printf("  %-24s %zu -> %zu (%.1f%%)\n", c.category.c_str(), c.before, c.after,
                    c.percent);
      std::printf("  average increase %.1f%%\n", s.report.average_percent);
    } else if (*curate) {
      const auto s = riskmine::cmd_curate(config, decisions_file, std::cin, std::cout);
      std::printf("accepted %zu, rejected %zu, skipped %zu -> %s\n", s.accepted, s.rejected,
                  s.skipped, s.taxonomy_path.string().c_str());
    } else if (*eval) {
      if (judgments.empty()) {
        if (extractions.empty()) extractions = config.output_dir / "extractions.jsonl";
        const auto s = riskmine::cmd_eval_pairs(config, extractions);
        std::printf("%zu pairs -> %s\n", s.pairs, s.pairs_path.string().c_str());
        for (const auto& [label, n] : s.by_comparison) std::printf("  %s: %zu\n", label.c_str(), n);
      } else {
        if (pairs.empty()) pairs = config.output_dir / "pairs.jsonl";
        print_report(riskmine::cmd_eval(config, pairs, judgments));
      }
    } else if (*stats) {
      const auto s = riskmine::cmd_stats(config);
      std::printf("m=%zu a=%.4f n=%zu b=%.4f comparisons_per_doc=%.1f\n", s.m, s.a, s.n, s.b,
                  s.comparisons_estimate);
    }
  } catch (const riskmine::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == riskmine::Errc::kInvalidConfig ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
