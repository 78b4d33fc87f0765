// One PASS/FAIL line per acceptance criterion; exit status is the number of
// failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "oracle/brute_force.h"
#include "oracle/synthetic.h"
#include "riskmine/embeddings.h"
#include "riskmine/error.h"
#include "riskmine/evalkit.h"
#include "riskmine/matcher.h"
#include "riskmine/pipeline.h"
#include "riskmine/random.h"
#include "riskmine/taxonomy.h"

using namespace riskmine;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(const std::string& name, bool ok, const std::string& detail) {
  std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

void run(const std::string& name, const std::function<bool(std::string&)>& body) {
  std::string detail;
  bool ok = false;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  report(name, ok, detail);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

bool chi_square_p_values(std::string& detail) {
  struct Row {
    double chi2;
    double p;
    double abs_tol;  // 0 means 1% relative
  };
  const Row rows[] = {{8.530, 0.003, 5e-4},    {28.088, 1.159e-07, 0}, {25.358, 4.762e-07, 0},
                      {37.763, 7.99e-10, 0},   {6.858, 0.008, 5e-4},   {25.705, 3.978e-07, 0},
                      {6.316, 0.011, 5e-4}};
  double worst_rel = 0.0;
  bool ok = true;
  std::string misses;
  for (const auto& r : rows) {
    const double p = chi2_survival(r.chi2, 1);
    if (r.abs_tol > 0) {
      const bool hit = std::abs(p - r.p) <= r.abs_tol;
      if (!hit) misses += fmt(" chi2=%.3f gives p=%.5f, expected %.3f +- %.0e;", r.chi2, p, r.p, r.abs_tol);
      ok &= hit;
    } else {
      const double rel = std::abs(p - r.p) / r.p;
      worst_rel = std::max(worst_rel, rel);
      ok &= rel <= 0.01;
    }
  }
  detail = fmt("7 rows, worst relative error on small p %.3g;", worst_rel) + misses;
  return ok;
}

bool oracle_equivalence(std::string& detail) {
  oracle::SyntheticOptions opt;
  opt.docs = 1000;
  opt.min_tokens = 0;
  opt.max_tokens = 2000;
  opt.seed = 2024;
  const auto corpus = oracle::make_corpus(opt);
  const Extractor extractor(corpus.taxonomy, corpus.entities);
  std::size_t discrepancies = 0, records = 0, tokens = 0;
  for (const auto& raw : corpus.docs) {
    const Document doc = ingest_document(raw);
    tokens += doc.tokens.size();
    const auto got = extractor.extract(doc, 100);
    const auto want = oracle::all_pairs_extract(doc, corpus.taxonomy, corpus.entities, 100);
    records += want.size();
    if (got != want) ++discrepancies;
  }
  detail = fmt("%zu docs, %zu tokens, %zu records, %zu discrepant docs", corpus.docs.size(),
               tokens, records, discrepancies);
  return discrepancies == 0 && records > 0;
}

Document mirrored(const Document& doc) {
  Document m;
  m.doc_id = doc.doc_id;
  m.tokens.assign(doc.tokens.rbegin(), doc.tokens.rend());
  for (std::size_t i = 0; i < m.tokens.size(); ++i) m.tokens[i].token_index = i;
  m.sentences.push_back({0, m.tokens.size()});
  return m;
}

PhraseSet reversed_phrases(const PhraseSet& set) {
  PhraseSet out;
  for (std::size_t p = 0; p < set.size(); ++p) {
    auto lemmas = set.lemmas(p);
    std::reverse(lemmas.begin(), lemmas.end());
    out.add(std::move(lemmas), set.owner(p));
  }
  return out;
}

bool cutoff_scope_symmetry(std::string& detail) {
  oracle::SyntheticOptions opt;
  opt.docs = 300;
  opt.max_tokens = 1500;
  opt.seed = 31;
  const auto corpus = oracle::make_corpus(opt);
  const Extractor extractor(corpus.taxonomy, corpus.entities);
  const PhraseSet rev_kw = reversed_phrases(extractor.keyword_phrases());
  const PhraseSet rev_ent = reversed_phrases(extractor.entity_phrases());

  std::size_t over_cutoff = 0, scope_errors = 0, asymmetric = 0, records = 0, checked = 0;
  for (const auto& raw : corpus.docs) {
    const Document doc = ingest_document(raw);
    for (const auto& r : extractor.extract(doc, 100)) {
      ++records;
      if (r.distance > 100) ++over_cutoff;
      const bool same = r.first_sentence == r.last_sentence;
      if ((r.scope == Scope::kSameSentence) != same) ++scope_errors;
    }

    const auto fwd = pair_nearest(extractor.keyword_occurrences(doc),
                                  extractor.entity_occurrences(doc));
    const Document m = mirrored(doc);
    const auto bwd = pair_nearest(find_occurrences(m, rev_kw), find_occurrences(m, rev_ent));
    const std::size_t n = doc.tokens.size();
    std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::size_t> back;
    for (const auto& x : bwd) back[{n - x.keyword.end, n - x.keyword.start, x.keyword.phrase}] = x.distance;
    if (back.size() != fwd.size()) ++asymmetric;
    for (const auto& x : fwd) {
      ++checked;
      const auto it = back.find({x.keyword.start, x.keyword.end, x.keyword.phrase});
      if (it == back.end() || it->second != x.distance) ++asymmetric;
    }
  }
  detail = fmt("%zu records: %zu over cutoff, %zu scope mismatches; %zu mirrored matches, %zu "
               "asymmetric",
               records, over_cutoff, scope_errors, checked, asymmetric);
  return records > 0 && checked > 0 && over_cutoff == 0 && scope_errors == 0 && asymmetric == 0;
}

double loss_at(const std::vector<std::vector<double>>& rows, const std::vector<double>& target,
               const std::vector<std::vector<double>>& negatives) {
  const std::size_t dim = target.size();
  std::vector<double> h(dim, 0.0);
  for (const auto& r : rows)
    for (std::size_t i = 0; i < dim; ++i) h[i] += r[i];
  std::vector<const double*> neg;
  for (const auto& n : negatives) neg.push_back(n.data());
  std::vector<double> gh(dim), gt(dim), gn(negatives.size() * dim);
  return skipgram_pair_gradient<double>(h, target, neg, gh, gt, gn);
}

bool gradient_check(std::string& detail) {
  constexpr std::size_t dim = 8, negs = 3;
  constexpr double step = 1e-5;
  SplitMix64 rng(77);
  auto random_vec = [&] {
    std::vector<double> v(dim);
    for (double& x : v) x = rng.uniform01() * 2.0 - 1.0;
    return v;
  };
  auto rel_err = [](double a, double n) {
    return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-6});
  };
  double worst = 0.0;
  for (int point = 0; point < 100; ++point) {
    // The center representation is a sum of a word row and subword rows.
    std::vector<std::vector<double>> rows(1 + rng.uniform(4));
    for (auto& r : rows) r = random_vec();
    auto target = random_vec();
    std::vector<std::vector<double>> negatives(negs);
    for (auto& n : negatives) n = random_vec();

    std::vector<double> h(dim, 0.0);
    for (const auto& r : rows)
      for (std::size_t i = 0; i < dim; ++i) h[i] += r[i];
    std::vector<const double*> neg;
    for (const auto& n : negatives) neg.push_back(n.data());
    std::vector<double> gh(dim, 0.0), gt(dim, 0.0), gn(negs * dim, 0.0);
    skipgram_pair_gradient<double>(h, target, neg, gh, gt, gn);

    auto central = [&](double& param) {
      const double saved = param;
      param = saved + step;
      const double up = loss_at(rows, target, negatives);
      param = saved - step;
      const double down = loss_at(rows, target, negatives);
      param = saved;
      return (up - down) / (2 * step);
    };
    for (auto& r : rows)
      for (std::size_t i = 0; i < dim; ++i) worst = std::max(worst, rel_err(gh[i], central(r[i])));
    for (std::size_t i = 0; i < dim; ++i) worst = std::max(worst, rel_err(gt[i], central(target[i])));
    for (std::size_t n = 0; n < negs; ++n)
      for (std::size_t i = 0; i < dim; ++i)
        worst = std::max(worst, rel_err(gn[n * dim + i], central(negatives[n][i])));
  }
  detail = fmt("100 points, dim 8, max relative error %.3g", worst);
  return worst < 1e-4;
}

bool deterministic_vectors(std::string& detail) {
  std::vector<Sentence> corpus;
  SplitMix64 rng(5);
  for (int i = 0; i < 400; ++i) {
    Sentence s;
    for (int k = 0; k < 12; ++k) s.push_back("w" + std::to_string(rng.uniform(60)));
    corpus.push_back(std::move(s));
  }
  EmbeddingConfig cfg;
  cfg.dim = 24;
  cfg.min_count = 1;
  cfg.bucket_count = 20000;
  cfg.epochs = 3;
  cfg.rng_seed = 11;
  const fs::path dir = fs::temp_directory_path() / "riskmine_acceptance_vectors";
  fs::create_directories(dir);
  WordVectors::from_model(train_skipgram(corpus, cfg)).save(dir / "a.txt");
  WordVectors::from_model(train_skipgram(corpus, cfg)).save(dir / "b.txt");
  const std::string a = slurp(dir / "a.txt");
  const bool identical = a == slurp(dir / "b.txt") && !a.empty();

  const auto loaded = WordVectors::load(dir / "a.txt");
  const auto fresh = WordVectors::from_model(train_skipgram(corpus, cfg));
  double drift = 0.0;
  for (std::size_t w = 0; w < fresh.size(); ++w)
    for (std::size_t i = 0; i < fresh.dim(); ++i)
      drift = std::max(drift, std::abs(double(loaded.vector(w)[i]) - double(fresh.vector(w)[i])));
  fs::remove_all(dir);
  detail = fmt("byte-identical=%s, round-trip max drift %.3g", identical ? "yes" : "no", drift);
  return identical && loaded.size() == fresh.size() && drift < 1e-6;
}

bool expansion_percentages(std::string& detail) {
  std::istringstream before_tsv([] {
    std::string s;
    const std::pair<const char*, int> cats[] = {{"cybersecurity", 26}, {"terrorism", 37},
                                                {"legal", 38}};
    for (const auto& [cat, n] : cats)
      for (int i = 0; i < n; ++i) s += std::string(cat) + "\t" + cat + "term" + std::to_string(i) + "\tseed\tactive\n";
    return s;
  }());
  const Taxonomy before = parse_taxonomy(before_tsv, "before");
  std::vector<ExpansionCandidate> candidates;
  const std::pair<const char*, int> added[] = {{"cybersecurity", 97}, {"terrorism", 110},
                                               {"legal", 124}};
  for (const auto& [cat, n] : added)
    for (int i = 0; i < n; ++i)
      candidates.push_back({cat, std::string(cat) + "term0", std::string(cat) + "new" + std::to_string(i), 0.5});
  Taxonomy after = merge_expansion(before, candidates);
  for (const auto& c : candidates) after = curate(after, {c.category, c.candidate}, Decision::kAccept);

  const auto report = expansion_report(before, after);
  const std::map<std::string, double> expected = {
      {"cybersecurity", 373.1}, {"terrorism", 297.3}, {"legal", 326.3}};
  bool ok = report.categories.size() == 3;
  std::string shown;
  for (const auto& c : report.categories) {
    // Independent recomputation from the raw counts.
    const double mine = (double(c.after) - double(c.before)) / double(c.before) * 100.0;
    ok &= std::abs(mine - c.percent) < 1e-9;
    ok &= std::abs(c.percent - expected.at(c.category)) <= 0.1;
    shown += fmt("%s %zu->%zu %.1f%% ", c.category.c_str(), c.before, c.after, c.percent);
  }
  detail = shown + fmt("avg %.1f%%", report.average_percent);
  return ok;
}

bool kappa_examples(std::string& detail) {
  using C = Choice;
  const double k1 = cohens_kappa({C::kA, C::kB, C::kNeither, C::kA},
                                 {C::kA, C::kB, C::kNeither, C::kA});
  // Independent marginals: p_o = p_e = 0.5.
  const double k0 = cohens_kappa({C::kA, C::kA, C::kB, C::kB}, {C::kA, C::kB, C::kA, C::kB});
  // p_o = 0.75, p_e = 0.5.
  const double kh = cohens_kappa({C::kA, C::kA, C::kB, C::kB}, {C::kA, C::kA, C::kB, C::kA});
  detail = fmt("identical %.6f, independent %.6f, 3/4 agreement %.6f", k1, k0, kh);
  return k1 == 1.0 && k0 == 0.0 && kh == 0.5;
}

bool preference_rate(std::string& detail) {
  std::vector<EvaluationPair> pairs;
  std::ostringstream csv;
  csv << "pair_id,annotator_id,choice\n";
  for (int i = 0; i < 4514; ++i) {
    EvaluationPair p;
    p.pair_id = "p" + std::to_string(i);
    p.category = "legal";
    p.set = "seed";
    p.scheme = PairScheme::kSingleVsBase;
    p.side_a = {kLabelSingle, "a"};
    p.side_b = {kLabelBaseline, "b"};
    pairs.push_back(p);
    const char* choice = i < 1266 ? (i % 2 ? "A" : "B") : "NEITHER";
    csv << p.pair_id << ",ann" << i % 3 << ',' << choice << '\n';
  }
  std::istringstream in(csv.str());
  const auto summary = summarize(read_judgments(in, "judgments.csv"), pairs);
  const double pct = std::round(summary.preference_rate() * 1000.0) / 10.0;
  detail = fmt("%zu of %zu preferred: %.1f%%", summary.preferred(), summary.total, pct);
  return summary.preferred() == 1266 && summary.total == 4514 && pct == 28.0;
}

bool parallel_equality_and_throughput(std::string& detail) {
  oracle::SyntheticOptions opt;
  opt.docs = 10000;
  opt.min_tokens = 400;
  opt.max_tokens = 600;
  opt.keywords = 100;
  opt.entities = 100;
  opt.seed = 9;
  const auto corpus = oracle::make_corpus(opt);
  const Extractor extractor(corpus.taxonomy, corpus.entities);
  const Ingestor& ingestor = default_ingestor();

  const auto start = std::chrono::steady_clock::now();
  const auto serial = process_documents_serial(extractor, ingestor, corpus.docs, 100, 1);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::size_t records = 0;
  for (const auto& r : serial) records += r.records.size();

  bool equal = true;
  for (int jobs : {1, 2, 8}) {
    const auto par = process_documents(extractor, ingestor, corpus.docs, 100, 1, jobs);
    equal &= par.size() == serial.size();
    for (std::size_t i = 0; equal && i < par.size(); ++i)
      equal &= par[i].records == serial[i].records;
  }
  detail = fmt("10000 docs, %zu records in %.1f s; jobs 1/2/8 identical=%s", records, seconds,
               equal ? "yes" : "no");
  return equal && records > 0 && seconds < 300.0;
}

}  // namespace

int main() {
  run("chi-square p-values", chi_square_p_values);
  run("oracle equivalence", oracle_equivalence);
  run("cutoff, scope and mirror symmetry", cutoff_scope_symmetry);
  run("skip-gram gradient check", gradient_check);
  run("deterministic vectors", deterministic_vectors);
  run("expansion percentages", expansion_percentages);
  run("cohen's kappa", kappa_examples);
  run("preference rate", preference_rate);
  run("parallel equality and throughput", parallel_equality_and_throughput);
  std::printf("%d failure(s)\n", failures);
  return failures == 0 ? 0 : 1;
}
