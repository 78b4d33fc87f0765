#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "oracle/synthetic.h"
#include "riskmine/embeddings.h"
#include "riskmine/pipeline.h"
#include "riskmine/random.h"

using namespace riskmine;

namespace {

const oracle::SyntheticCorpus& corpus() {
  static const oracle::SyntheticCorpus c = [] {
    oracle::SyntheticOptions opt;
    opt.docs = 2000;
    opt.min_tokens = 400;
    opt.max_tokens = 600;
    return oracle::make_corpus(opt);
  }();
  return c;
}

const WordVectors& vectors() {
  static const WordVectors v = [] {
    SplitMix64 rng(3);
    std::vector<std::string> words;
    std::vector<float> data;
    for (int w = 0; w < 50000; ++w) {
      words.push_back("w" + std::to_string(w));
      for (int i = 0; i < 100; ++i) data.push_back(static_cast<float>(rng.uniform01() - 0.5));
    }
    return WordVectors(std::move(words), 100, std::move(data));
  }();
  return v;
}

void BM_ExtractSerial(benchmark::State& state) {
  const Extractor ex(corpus().taxonomy, corpus().entities);
  for (auto _ : state)
    benchmark::DoNotOptimize(process_documents_serial(ex, default_ingestor(), corpus().docs, 100, 1));
  state.SetItemsProcessed(state.iterations() * corpus().docs.size());
}

void BM_ExtractParallel(benchmark::State& state) {
  const Extractor ex(corpus().taxonomy, corpus().entities);
  const int jobs = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(process_documents(ex, default_ingestor(), corpus().docs, 100, 1, jobs));
  state.SetItemsProcessed(state.iterations() * corpus().docs.size());
}

void BM_TopKSerial(benchmark::State& state) {
  vectors();
  for (auto _ : state) benchmark::DoNotOptimize(vectors().top_k_serial("w7", 10));
}

void BM_TopKParallel(benchmark::State& state) {
  const int jobs = static_cast<int>(state.range(0));
  vectors();
  for (auto _ : state) benchmark::DoNotOptimize(vectors().top_k("w7", 10, jobs));
}

}  // namespace

BENCHMARK(BM_ExtractSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ExtractParallel)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_TopKSerial)->Unit(benchmark::kMicrosecond)->UseRealTime();
BENCHMARK(BM_TopKParallel)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMicrosecond)->UseRealTime();

BENCHMARK_MAIN();
