#pragma once

// Skipgram word embeddings with hashed character n-gram subwords, trained
// with negative sampling, plus the cosine top-k query engine used to propose
// taxonomy expansion candidates.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "riskmine/taxonomy.h"
#include "riskmine/text.h"

namespace riskmine {

struct EmbeddingConfig {
  int dim = 100;
  int window = 5;
  int negatives = 5;
  int min_count = 5;
  int ngram_min = 3;
  int ngram_max = 6;
  std::uint32_t bucket_count = 2'000'000;
  int epochs = 5;
  double learning_rate = 0.05;
  std::uint64_t rng_seed = 1;

  // Throws kInvalidConfig.
  void validate() const;

  bool operator==(const EmbeddingConfig&) const = default;
};

class Vocabulary {
 public:
  struct Entry {
    std::string word;
    std::uint64_t count = 0;

    bool operator==(const Entry&) const = default;
  };

  Vocabulary() = default;
  explicit Vocabulary(std::vector<Entry> entries);

  std::size_t size() const { return entries_.size(); }
  const Entry& operator[](std::size_t i) const { return entries_[i]; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::optional<std::size_t> find(std::string_view word) const;

  bool operator==(const Vocabulary& other) const { return entries_ == other.entries_; }

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

using Sentence = std::vector<std::string>;

// Words with count >= min_count ordered by descending count then
// lexicographically. Throws kEmptyVocabulary.
Vocabulary build_vocab(const std::vector<Sentence>& corpus, int min_count);

// Character n-grams (counted in code points) of "<word>" with lengths in
// [ngram_min, ngram_max], excluding the whole bracketed word. Words shorter
// than ngram_min have none.
std::vector<std::string> char_ngrams(std::string_view word, int ngram_min, int ngram_max);

// 32-bit FNV-1a, the subword bucket hash.
std::uint32_t subword_hash(std::string_view s);

// Loss and gradients of one (center, context) update:
//   L = -log s(h.o_t) - sum_n log s(-h.o_n)
// where h is the center representation and o_* are output vectors. Gradients
// are accumulated (+=) into grad_hidden (dim), grad_target (dim) and
// grad_negatives (negatives.size() * dim). The trainer and the gradient
// check both use this kernel.
template <typename T>
T skipgram_pair_gradient(std::span<const T> hidden, std::span<const T> target,
                         std::span<const T* const> negatives, std::span<T> grad_hidden,
                         std::span<T> grad_target, std::span<T> grad_negatives) {
  const std::size_t dim = hidden.size();
  auto dot = [&](const T* o) {
    T s = 0;
    for (std::size_t i = 0; i < dim; ++i) s += hidden[i] * o[i];
    return s;
  };
  // -log s(z) = log(1 + e^-z), computed without overflow.
  auto softplus = [](T z) {
    return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
  };
  auto sigmoid = [](T z) {
    if (z >= 0) return T(1) / (T(1) + std::exp(-z));
    const T e = std::exp(z);
    return e / (T(1) + e);
  };

  const T pos = dot(target.data());
  T loss = softplus(-pos);
  const T g_pos = sigmoid(pos) - T(1);  // dL/d(h.o_t)
  for (std::size_t i = 0; i < dim; ++i) {
    grad_hidden[i] += g_pos * target[i];
    grad_target[i] += g_pos * hidden[i];
  }
  for (std::size_t n = 0; n < negatives.size(); ++n) {
    const T* o = negatives[n];
    const T s = dot(o);
    loss += softplus(s);
    const T g = sigmoid(s);  // dL/d(h.o_n)
    T* gn = grad_negatives.data() + n * dim;
    for (std::size_t i = 0; i < dim; ++i) {
      grad_hidden[i] += g * o[i];
      gn[i] += g * hidden[i];
    }
  }
  return loss;
}

struct TrainOptions {
  // Single-threaded and bit-reproducible. When false, `jobs` threads update
  // shared parameters without locking and results vary run to run.
  bool deterministic = true;
  int jobs = 1;
};

struct TrainStats {
  std::vector<double> epoch_mean_loss;
  std::uint64_t updates = 0;
};

class EmbeddingModel {
 public:
  // Input rows drawn uniformly from [-1/dim, 1/dim] (deterministic in the
  // seed), output rows zero.
  static EmbeddingModel initialize(Vocabulary vocab, const EmbeddingConfig& config);

  const EmbeddingConfig& config() const { return config_; }
  const Vocabulary& vocab() const { return vocab_; }
  std::size_t dim() const { return static_cast<std::size_t>(config_.dim); }

  // r(w): word row plus subword-bucket rows for vocabulary words; subword
  // rows alone otherwise. Throws kNoRepresentation.
  std::vector<float> word_vector(std::string_view word) const;

  // Input-matrix rows summed into the representation of vocab word i.
  std::span<const std::size_t> rows_of(std::size_t word) const { return word_rows_[word]; }
  std::size_t input_row_count() const { return input_.size() / dim(); }
  std::span<const float> input_row(std::size_t row) const {
    return {input_.data() + row * dim(), dim()};
  }
  std::span<float> mutable_input_row(std::size_t row) {
    return {input_.data() + row * dim(), dim()};
  }
  std::span<const float> output_row(std::size_t word) const {
    return {output_.data() + word * dim(), dim()};
  }
  std::span<float> mutable_output_row(std::size_t word) {
    return {output_.data() + word * dim(), dim()};
  }

  // Draws for the trainer's negative sampler (unigram^0.75).
  std::size_t sample_negative(double u) const;

  bool operator==(const EmbeddingModel&) const = default;

 private:
  friend TrainStats train_skipgram_into(EmbeddingModel&, const std::vector<Sentence>&,
                                        const TrainOptions&);

  std::vector<float> initial_row(std::uint64_t key) const;

  EmbeddingConfig config_;
  Vocabulary vocab_;
  std::vector<float> input_;  // words first, then used subword buckets
  std::vector<float> output_;
  std::unordered_map<std::uint32_t, std::size_t> bucket_rows_;
  std::vector<std::vector<std::size_t>> word_rows_;
  std::vector<double> negative_cdf_;
};

// Builds the vocabulary and trains. Throws kEmptyVocabulary, kNonFiniteLoss.
EmbeddingModel train_skipgram(const std::vector<Sentence>& corpus, const EmbeddingConfig& config,
                              const TrainOptions& options = {}, TrainStats* stats = nullptr);

// Continues training an initialized model over the corpus for config.epochs.
TrainStats train_skipgram_into(EmbeddingModel& model, const std::vector<Sentence>& corpus,
                               const TrainOptions& options);

// Cosine of the two word vectors. Throws kNoRepresentation, kZeroVector.
double similarity(const EmbeddingModel& model, std::string_view a, std::string_view b);
double cosine(std::span<const float> a, std::span<const float> b);

struct ScoredWord {
  std::string word;
  double score = 0.0;

  bool operator==(const ScoredWord&) const = default;
};

// Vocabulary-ordered table of composed word vectors: the exported artifact
// and the similarity query engine.
class WordVectors {
 public:
  WordVectors() = default;
  WordVectors(std::vector<std::string> words, std::size_t dim, std::vector<float> data);

  static WordVectors from_model(const EmbeddingModel& model);

  // Text format: "vocab_size dim" header, then "word v_1 ... v_dim" lines.
  static WordVectors load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
  std::string to_text() const;

  std::size_t size() const { return words_.size(); }
  std::size_t dim() const { return dim_; }
  const std::string& word(std::size_t i) const { return words_[i]; }
  std::span<const float> vector(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
  std::optional<std::size_t> find(std::string_view word) const;

  // Throws kOutOfVocabularyTerm, kZeroVector.
  double similarity(std::string_view a, std::string_view b) const;

  // The k most similar vocabulary words, excluding `term`, by descending
  // cosine with ties in vocabulary order. Scores are computed by `jobs`
  // OpenMP threads. Throws kOutOfVocabularyTerm.
  std::vector<ScoredWord> top_k(std::string_view term, std::size_t k, int jobs = 1) const;
  // Single-threaded reference for top_k.
  std::vector<ScoredWord> top_k_serial(std::string_view term, std::size_t k) const;

  // Ranking for an arbitrary query vector; `exclude` is skipped if set.
  std::vector<ScoredWord> top_k_by_vector(std::span<const float> query, std::size_t k,
                                          std::optional<std::size_t> exclude,
                                          int jobs = 1) const;

 private:
  std::vector<std::string> words_;
  std::size_t dim_ = 0;
  std::vector<float> data_;
  std::vector<double> norms_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Vocabulary key of a taxonomy term: the lowercased word for single-token
// terms, lemmas joined with '_' for multi-token terms.
std::string vocab_key(const TaxonomyTerm& term);

// Training sequences, one per document: lowercased non-punctuation tokens,
// with runs matching a multi-token active term replaced by its vocab_key.
std::vector<Sentence> training_corpus(const std::vector<Document>& docs,
                                      const Taxonomy* taxonomy = nullptr);

struct ExpansionResult {
  std::vector<ExpansionCandidate> candidates;
  std::vector<TermId> skipped;  // active terms missing from the vocabulary
};

ExpansionResult expand_taxonomy(const WordVectors& vectors, const Taxonomy& taxonomy,
                                std::size_t k, int jobs = 1);

}  // namespace riskmine
