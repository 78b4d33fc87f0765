#include "riskmine/embeddings.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include <omp.h>

#include "riskmine/error.h"
#include "riskmine/matcher.h"
#include "riskmine/random.h"

namespace riskmine {

void EmbeddingConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(Errc::kInvalidConfig, what); };
  if (dim < 1) fail("dim must be >= 1");
  if (window < 1) fail("window must be >= 1");
  if (negatives < 1) fail("negatives must be >= 1");
  if (min_count < 1) fail("min_count must be >= 1");
  if (ngram_min < 1 || ngram_max < ngram_min) fail("need 1 <= ngram_min <= ngram_max");
  if (bucket_count < 1) fail("bucket_count must be >= 1");
  if (epochs < 0) fail("epochs must be >= 0");
  if (!(learning_rate > 0.0)) fail("learning_rate must be > 0");
}

Vocabulary::Vocabulary(std::vector<Entry> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) index_.emplace(entries_[i].word, i);
}

std::optional<std::size_t> Vocabulary::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Vocabulary build_vocab(const std::vector<Sentence>& corpus, int min_count) {
  std::unordered_map<std::string, std::uint64_t> counts;
  for (const auto& sentence : corpus) {
    for (const auto& w : sentence) ++counts[w];
  }
  std::vector<Vocabulary::Entry> entries;
  for (auto& [word, count] : counts) {
    if (count >= static_cast<std::uint64_t>(min_count)) entries.push_back({word, count});
  }
  if (entries.empty()) {
    throw Error(Errc::kEmptyVocabulary,
                "no word occurs at least " + std::to_string(min_count) + " times");
  }
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    return a.count != b.count ? a.count > b.count : a.word < b.word;
  });
  return Vocabulary(std::move(entries));
}

std::vector<std::string> char_ngrams(std::string_view word, int ngram_min, int ngram_max) {
  // Code point boundaries of the bracketed word.
  const std::string bracketed = "<" + std::string(word) + ">";
  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i < bracketed.size(); ++i) {
    if ((static_cast<unsigned char>(bracketed[i]) & 0xC0) != 0x80) starts.push_back(i);
  }
  const std::size_t chars = starts.size();
  std::vector<std::string> out;
  if (chars - 2 < static_cast<std::size_t>(ngram_min)) return out;
  starts.push_back(bracketed.size());
  for (std::size_t i = 0; i < chars; ++i) {
    for (int n = ngram_min; n <= ngram_max; ++n) {
      const std::size_t j = i + static_cast<std::size_t>(n);
      if (j > chars) break;
      if (i == 0 && j == chars) continue;  // the whole word has its own row
      out.push_back(bracketed.substr(starts[i], starts[j] - starts[i]));
    }
  }
  return out;
}

std::uint32_t subword_hash(std::string_view s) {
  std::uint32_t h = 2166136261u;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 16777619u;
  }
  return h;
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::uint64_t kBucketKeyTag = 1ULL << 40;

}  // namespace

std::vector<float> EmbeddingModel::initial_row(std::uint64_t key) const {
  SplitMix64 rng(derive_seed(config_.rng_seed, "init") ^ (key * 0x9e3779b97f4a7c15ULL));
  std::vector<float> row(dim());
  const double scale = 1.0 / static_cast<double>(config_.dim);
  for (float& v : row) v = static_cast<float>((2.0 * rng.uniform01() - 1.0) * scale);
  return row;
}

EmbeddingModel EmbeddingModel::initialize(Vocabulary vocab, const EmbeddingConfig& config) {
  config.validate();
  if (vocab.size() == 0) throw Error(Errc::kEmptyVocabulary, "empty vocabulary");
  EmbeddingModel m;
  m.config_ = config;
  m.vocab_ = std::move(vocab);
  const std::size_t dim = m.dim();
  const std::size_t v = m.vocab_.size();

  m.input_.reserve(v * dim);
  for (std::size_t w = 0; w < v; ++w) {
    const auto row = m.initial_row(w);
    m.input_.insert(m.input_.end(), row.begin(), row.end());
  }
  m.word_rows_.resize(v);
  for (std::size_t w = 0; w < v; ++w) {
    auto& rows = m.word_rows_[w];
    rows.push_back(w);
    for (const auto& gram : char_ngrams(m.vocab_[w].word, config.ngram_min, config.ngram_max)) {
      const std::uint32_t bucket = subword_hash(gram) % config.bucket_count;
      auto [it, inserted] = m.bucket_rows_.try_emplace(bucket, m.input_.size() / dim);
      if (inserted) {
        const auto row = m.initial_row(kBucketKeyTag | bucket);
        m.input_.insert(m.input_.end(), row.begin(), row.end());
      }
      rows.push_back(it->second);
    }
  }
  m.output_.assign(v * dim, 0.0f);

  m.negative_cdf_.resize(v);
  double acc = 0.0;
  for (std::size_t w = 0; w < v; ++w) {
    acc += std::pow(static_cast<double>(m.vocab_[w].count), 0.75);
    m.negative_cdf_[w] = acc;
  }
  return m;
}

std::size_t EmbeddingModel::sample_negative(double u) const {
  const double target = u * negative_cdf_.back();
  auto it = std::upper_bound(negative_cdf_.begin(), negative_cdf_.end(), target);
  return std::min(static_cast<std::size_t>(it - negative_cdf_.begin()), vocab_.size() - 1);
}

std::vector<float> EmbeddingModel::word_vector(std::string_view word) const {
  if (word.empty()) throw Error(Errc::kNoRepresentation, "empty word");
  std::vector<float> out(dim(), 0.0f);
  auto add = [&](std::span<const float> row) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += row[i];
  };
  if (auto w = vocab_.find(word)) {
    for (std::size_t row : word_rows_[*w]) add(input_row(row));
    return out;
  }
  const auto grams = char_ngrams(word, config_.ngram_min, config_.ngram_max);
  if (grams.empty()) {
    throw Error(Errc::kNoRepresentation,
                "'" + std::string(word) + "' is out of vocabulary and has no subwords");
  }
  for (const auto& gram : grams) {
    const std::uint32_t bucket = subword_hash(gram) % config_.bucket_count;
    if (auto it = bucket_rows_.find(bucket); it != bucket_rows_.end()) {
      add(input_row(it->second));
    } else {
      add(initial_row(kBucketKeyTag | bucket));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Training

namespace {

// Parameter access. Shared mode goes through relaxed atomics so concurrent
// workers may lose updates but never race.
template <bool kShared>
inline float load(const float& x) {
  if constexpr (kShared) {
    return std::atomic_ref<float>(const_cast<float&>(x)).load(std::memory_order_relaxed);
  } else {
    return x;
  }
}

template <bool kShared>
inline void add_to(float& x, float delta) {
  if constexpr (kShared) {
    std::atomic_ref<float> ref(x);
    ref.store(ref.load(std::memory_order_relaxed) + delta, std::memory_order_relaxed);
  } else {
    x += delta;
  }
}

struct Workspace {
  explicit Workspace(std::size_t dim, std::size_t negatives)
      : hidden(dim), target(dim), negative_rows(negatives * dim), negative_ptrs(negatives),
        negative_ids(negatives), grad_hidden(dim), grad_target(dim),
        grad_negatives(negatives * dim) {}

  std::vector<float> hidden, target, negative_rows;
  std::vector<const float*> negative_ptrs;
  std::vector<std::size_t> negative_ids;
  std::vector<float> grad_hidden, grad_target, grad_negatives;
};

struct WorkerResult {
  double loss = 0.0;
  std::uint64_t updates = 0;
  bool non_finite = false;
  std::string diagnostic;
};

}  // namespace

namespace detail {

// One pass over sequences[begin, end) with stride. Progress (for the
// learning-rate schedule) is shared so parallel workers decay together.
template <bool kShared>
WorkerResult train_pass(std::vector<float>& input, std::vector<float>& output,
                        const std::vector<std::vector<std::size_t>>& word_rows,
                        const EmbeddingModel& model,
                        const std::vector<std::vector<std::size_t>>& sequences,
                        std::size_t first, std::size_t stride, SplitMix64& rng,
                        std::atomic<std::uint64_t>& progress, std::uint64_t total_progress,
                        int epoch) {
  const EmbeddingConfig& cfg = model.config();
  const std::size_t dim = model.dim();
  const std::size_t negatives = static_cast<std::size_t>(cfg.negatives);
  const std::size_t vocab = model.vocab().size();
  const std::ptrdiff_t window = cfg.window;
  Workspace ws(dim, vocab > 1 ? negatives : 0);
  WorkerResult result;

  for (std::size_t s = first; s < sequences.size(); s += stride) {
    const auto& seq = sequences[s];
    const auto len = static_cast<std::ptrdiff_t>(seq.size());
    for (std::ptrdiff_t pos = 0; pos < len; ++pos) {
      const std::uint64_t done = progress.fetch_add(1, std::memory_order_relaxed);
      const double ratio = static_cast<double>(done) / static_cast<double>(total_progress);
      const auto lr = static_cast<float>(cfg.learning_rate * std::max(0.0, 1.0 - ratio));
      const std::size_t center = seq[static_cast<std::size_t>(pos)];
      const auto& rows = word_rows[center];

      for (std::ptrdiff_t c = std::max<std::ptrdiff_t>(0, pos - window);
           c <= std::min(len - 1, pos + window); ++c) {
        if (c == pos) continue;
        const std::size_t target = seq[static_cast<std::size_t>(c)];

        std::fill(ws.hidden.begin(), ws.hidden.end(), 0.0f);
        for (std::size_t row : rows) {
          const float* r = input.data() + row * dim;
          for (std::size_t i = 0; i < dim; ++i) ws.hidden[i] += load<kShared>(r[i]);
        }
        for (std::size_t i = 0; i < dim; ++i) {
          ws.target[i] = load<kShared>(output[target * dim + i]);
        }
        for (std::size_t n = 0; n < ws.negative_ids.size(); ++n) {
          std::size_t neg;
          do {
            neg = model.sample_negative(rng.uniform01());
          } while (neg == target);
          ws.negative_ids[n] = neg;
          float* dst = ws.negative_rows.data() + n * dim;
          for (std::size_t i = 0; i < dim; ++i) dst[i] = load<kShared>(output[neg * dim + i]);
          ws.negative_ptrs[n] = dst;
        }
        std::fill(ws.grad_hidden.begin(), ws.grad_hidden.end(), 0.0f);
        std::fill(ws.grad_target.begin(), ws.grad_target.end(), 0.0f);
        std::fill(ws.grad_negatives.begin(), ws.grad_negatives.end(), 0.0f);

        const float loss = skipgram_pair_gradient<float>(
            ws.hidden, ws.target, ws.negative_ptrs, ws.grad_hidden, ws.grad_target,
            std::span<float>(ws.grad_negatives.data(), ws.negative_ids.size() * dim));
        if (!std::isfinite(loss)) {
          result.non_finite = true;
          result.diagnostic = "epoch " + std::to_string(epoch + 1) + ", center '" +
                              model.vocab()[center].word + "', context '" +
                              model.vocab()[target].word + "', lr " + std::to_string(lr);
          return result;
        }
        result.loss += loss;
        ++result.updates;

        for (std::size_t i = 0; i < dim; ++i) {
          add_to<kShared>(output[target * dim + i], -lr * ws.grad_target[i]);
        }
        for (std::size_t n = 0; n < ws.negative_ids.size(); ++n) {
          const std::size_t neg = ws.negative_ids[n];
          const float* g = ws.grad_negatives.data() + n * dim;
          for (std::size_t i = 0; i < dim; ++i) add_to<kShared>(output[neg * dim + i], -lr * g[i]);
        }
        for (std::size_t row : rows) {
          float* r = input.data() + row * dim;
          for (std::size_t i = 0; i < dim; ++i) add_to<kShared>(r[i], -lr * ws.grad_hidden[i]);
        }
      }
    }
  }
  return result;
}

}  // namespace detail

TrainStats train_skipgram_into(EmbeddingModel& model, const std::vector<Sentence>& corpus,
                               const TrainOptions& options) {
  const EmbeddingConfig& cfg = model.config_;
  TrainStats stats;
  std::vector<std::vector<std::size_t>> sequences;
  std::uint64_t tokens = 0;
  for (const auto& sentence : corpus) {
    std::vector<std::size_t> ids;
    for (const auto& w : sentence) {
      if (auto id = model.vocab_.find(w)) ids.push_back(*id);
    }
    tokens += ids.size();
    if (!ids.empty()) sequences.push_back(std::move(ids));
  }
  if (cfg.epochs == 0 || tokens == 0) return stats;

  const std::uint64_t total = tokens * static_cast<std::uint64_t>(cfg.epochs);
  std::atomic<std::uint64_t> progress{0};
  const int jobs = options.deterministic ? 1 : std::max(1, options.jobs);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<WorkerResult> results(static_cast<std::size_t>(jobs));
    if (jobs == 1) {
      SplitMix64 rng(derive_seed(cfg.rng_seed, "train/epoch/" + std::to_string(epoch)));
      results[0] = detail::train_pass<false>(model.input_, model.output_, model.word_rows_, model,
                                             sequences, 0, 1, rng, progress, total, epoch);
    } else {
#pragma omp parallel num_threads(jobs)
      {
        const int tid = omp_get_thread_num();
        const int nthreads = omp_get_num_threads();
        SplitMix64 rng(derive_seed(cfg.rng_seed, "train/epoch/" + std::to_string(epoch) +
                                                     "/thread/" + std::to_string(tid)));
        results[static_cast<std::size_t>(tid)] = detail::train_pass<true>(
            model.input_, model.output_, model.word_rows_, model, sequences,
            static_cast<std::size_t>(tid), static_cast<std::size_t>(nthreads), rng, progress,
            total, epoch);
      }
    }
    double loss = 0.0;
    std::uint64_t updates = 0;
    for (const auto& r : results) {
      if (r.non_finite) throw Error(Errc::kNonFiniteLoss, r.diagnostic);
      loss += r.loss;
      updates += r.updates;
    }
    stats.updates += updates;
    stats.epoch_mean_loss.push_back(updates == 0 ? 0.0 : loss / static_cast<double>(updates));
  }
  return stats;
}

EmbeddingModel train_skipgram(const std::vector<Sentence>& corpus, const EmbeddingConfig& config,
                              const TrainOptions& options, TrainStats* stats) {
  config.validate();
  EmbeddingModel model = EmbeddingModel::initialize(build_vocab(corpus, config.min_count), config);
  TrainStats s = train_skipgram_into(model, corpus, options);
  if (stats != nullptr) *stats = std::move(s);
  return model;
}

// ---------------------------------------------------------------------------
// Similarity

double cosine(std::span<const float> a, std::span<const float> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw Error(Errc::kZeroVector, "cosine of a zero vector");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

double similarity(const EmbeddingModel& model, std::string_view a, std::string_view b) {
  return cosine(model.word_vector(a), model.word_vector(b));
}

WordVectors::WordVectors(std::vector<std::string> words, std::size_t dim, std::vector<float> data)
    : words_(std::move(words)), dim_(dim), data_(std::move(data)) {
  if (data_.size() != words_.size() * dim_) {
    throw Error(Errc::kInvalidConfig, "vector table size does not match vocab_size * dim");
  }
  norms_.resize(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    double n = 0.0;
    for (float v : vector(i)) n += static_cast<double>(v) * v;
    norms_[i] = std::sqrt(n);
    index_.emplace(words_[i], i);
  }
}

WordVectors WordVectors::from_model(const EmbeddingModel& model) {
  std::vector<std::string> words;
  std::vector<float> data;
  data.reserve(model.vocab().size() * model.dim());
  for (const auto& e : model.vocab().entries()) {
    words.push_back(e.word);
    const auto v = model.word_vector(e.word);
    data.insert(data.end(), v.begin(), v.end());
  }
  return WordVectors(std::move(words), model.dim(), std::move(data));
}

std::string WordVectors::to_text() const {
  std::string out = std::to_string(words_.size()) + " " + std::to_string(dim_) + "\n";
  char buf[32];
  for (std::size_t i = 0; i < words_.size(); ++i) {
    out += words_[i];
    for (float v : vector(i)) {
      auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
      out += ' ';
      out.append(buf, end);
    }
    out += '\n';
  }
  return out;
}

void WordVectors::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::kIo, "cannot write " + path.string());
  out << to_text();
}

WordVectors WordVectors::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kIo, "cannot open vectors " + path.string());
  std::string line;
  std::size_t count = 0, dim = 0;
  if (!std::getline(in, line) || !(std::istringstream(line) >> count >> dim) || dim == 0) {
    throw Error(Errc::kParse, path.string() + ":1: expected 'vocab_size dim'");
  }
  std::vector<std::string> words;
  std::vector<float> data;
  data.reserve(count * dim);
  std::size_t line_no = 1;
  while (words.size() < count && std::getline(in, line)) {
    ++line_no;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    const char* p = line.data();
    const char* end = line.data() + line.size();
    const char* space = std::find(p, end, ' ');
    if (space == p || space == end) throw Error(Errc::kParse, where + ": malformed row");
    words.emplace_back(p, space);
    p = space;
    for (std::size_t i = 0; i < dim; ++i) {
      while (p < end && *p == ' ') ++p;
      float v = 0.0f;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc()) throw Error(Errc::kParse, where + ": expected " + std::to_string(dim) + " floats");
      data.push_back(v);
      p = next;
    }
    while (p < end && (*p == ' ' || *p == '\r')) ++p;
    if (p != end) throw Error(Errc::kParse, where + ": trailing data");
  }
  if (words.size() != count) {
    throw Error(Errc::kParse, path.string() + ": expected " + std::to_string(count) + " rows");
  }
  return WordVectors(std::move(words), dim, std::move(data));
}

std::optional<std::size_t> WordVectors::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

double WordVectors::similarity(std::string_view a, std::string_view b) const {
  const auto ia = find(a);
  const auto ib = find(b);
  if (!ia) throw Error(Errc::kOutOfVocabularyTerm, std::string(a));
  if (!ib) throw Error(Errc::kOutOfVocabularyTerm, std::string(b));
  return cosine(vector(*ia), vector(*ib));
}

namespace {

std::vector<ScoredWord> select_top(const std::vector<std::string>& words,
                                   const std::vector<double>& scores,
                                   const std::vector<char>& eligible, std::size_t k) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (eligible[i]) idx.push_back(i);
  }
  const std::size_t take = std::min(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
                    });
  std::vector<ScoredWord> out;
  for (std::size_t i = 0; i < take; ++i) out.push_back({words[idx[i]], scores[idx[i]]});
  return out;
}

}  // namespace

std::vector<ScoredWord> WordVectors::top_k_by_vector(std::span<const float> query, std::size_t k,
                                                     std::optional<std::size_t> exclude,
                                                     int jobs) const {
  double qn = 0.0;
  for (float v : query) qn += static_cast<double>(v) * v;
  if (qn == 0.0) throw Error(Errc::kZeroVector, "query vector is zero");
  qn = std::sqrt(qn);

  const auto n = static_cast<std::ptrdiff_t>(words_.size());
  std::vector<double> scores(words_.size(), 0.0);
  std::vector<char> eligible(words_.size(), 0);
#pragma omp parallel for num_threads(std::max(1, jobs)) schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    if ((exclude && *exclude == u) || norms_[u] == 0.0) continue;
    const float* v = data_.data() + u * dim_;
    double dot = 0.0;
    for (std::size_t d = 0; d < dim_; ++d) dot += static_cast<double>(query[d]) * v[d];
    scores[u] = dot / (qn * norms_[u]);
    eligible[u] = 1;
  }
  return select_top(words_, scores, eligible, k);
}

std::vector<ScoredWord> WordVectors::top_k(std::string_view term, std::size_t k, int jobs) const {
  const auto id = find(term);
  if (!id) throw Error(Errc::kOutOfVocabularyTerm, std::string(term));
  return top_k_by_vector(vector(*id), k, id, jobs);
}

std::vector<ScoredWord> WordVectors::top_k_serial(std::string_view term, std::size_t k) const {
  const auto id = find(term);
  if (!id) throw Error(Errc::kOutOfVocabularyTerm, std::string(term));
  const auto query = vector(*id);
  std::vector<double> scores(words_.size(), 0.0);
  std::vector<char> eligible(words_.size(), 0);
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (i == *id || norms_[i] == 0.0) continue;
    scores[i] = cosine(query, vector(i));
    eligible[i] = 1;
  }
  return select_top(words_, scores, eligible, k);
}

// ---------------------------------------------------------------------------

std::string vocab_key(const TaxonomyTerm& term) {
  if (term.lemma_tokens.size() == 1) {
    const auto tokens = tokenize(term.term);
    return ascii_lower(tokens.empty() ? term.term : tokens.front().surface);
  }
  std::string key;
  for (const auto& lemma : term.lemma_tokens) {
    if (!key.empty()) key += '_';
    key += lemma;
  }
  return key;
}

std::vector<Sentence> training_corpus(const std::vector<Document>& docs,
                                      const Taxonomy* taxonomy) {
  PhraseSet phrases;
  std::vector<std::string> keys;
  if (taxonomy != nullptr) {
    for (const TaxonomyTerm* t : taxonomy->active_terms()) {
      if (t->lemma_tokens.size() < 2) continue;
      phrases.add(t->lemma_tokens, keys.size());
      keys.push_back(vocab_key(*t));
    }
  }
  std::vector<Sentence> out;
  out.reserve(docs.size());
  for (const Document& doc : docs) {
    Sentence s;
    const auto& tokens = doc.tokens;
    for (std::size_t i = 0; i < tokens.size();) {
      std::size_t best_len = 0;
      std::size_t best_key = 0;
      if (const auto* ids = phrases.starting_with(tokens[i].lemma)) {
        for (std::size_t id : *ids) {
          const auto& lemmas = phrases.lemmas(id);
          if (lemmas.size() <= best_len || i + lemmas.size() > tokens.size()) continue;
          bool hit = true;
          for (std::size_t k = 1; k < lemmas.size() && hit; ++k) {
            hit = tokens[i + k].lemma == lemmas[k];
          }
          if (hit) {
            best_len = lemmas.size();
            best_key = phrases.owner(id);
          }
        }
      }
      if (best_len > 0) {
        s.push_back(keys[best_key]);
        i += best_len;
        continue;
      }
      if (!is_punctuation_token(tokens[i].surface)) s.push_back(ascii_lower(tokens[i].surface));
      ++i;
    }
    out.push_back(std::move(s));
  }
  return out;
}

ExpansionResult expand_taxonomy(const WordVectors& vectors, const Taxonomy& taxonomy,
                                std::size_t k, int jobs) {
  ExpansionResult result;
  for (const TaxonomyTerm* t : taxonomy.active_terms()) {
    const std::string key = vocab_key(*t);
    if (!vectors.find(key)) {
      result.skipped.push_back({t->category, t->term});
      continue;
    }
    for (auto& hit : vectors.top_k(key, k, jobs)) {
      result.candidates.push_back({t->category, t->term, std::move(hit.word), hit.score});
    }
  }
  return result;
}

}  // namespace riskmine
