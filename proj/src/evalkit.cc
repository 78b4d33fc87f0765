#include "riskmine/evalkit.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"
#include "riskmine/error.h"
#include "riskmine/random.h"

namespace riskmine {

using nlohmann::ordered_json;

BaselineChoice sample_baseline(const Document& doc, std::uint64_t seed) {
  if (doc.sentences.empty()) {
    throw Error(Errc::kNoSentences, "document " + doc.doc_id + " has no sentences");
  }
  SplitMix64 rng(seed);
  BaselineChoice choice;
  choice.sentence = static_cast<std::size_t>(rng.uniform(doc.sentences.size()));
  const SentenceRange& s = doc.sentences[choice.sentence];
  const std::size_t begin = doc.tokens[s.begin].char_start;
  const std::size_t end = doc.tokens[s.end - 1].char_end;
  choice.text = doc.text.substr(begin, end - begin);
  return choice;
}

std::string_view to_string(PairScheme s) {
  switch (s) {
    case PairScheme::kSingleVsBase: return "single-vs-base";
    case PairScheme::kMultiVsBase: return "multi-vs-base";
    case PairScheme::kSingleVsMulti: return "single-vs-multi";
  }
  return "single-vs-multi";
}

namespace {

PairScheme parse_scheme(const std::string& s, const std::string& where) {
  for (PairScheme p : {PairScheme::kSingleVsBase, PairScheme::kMultiVsBase,
                       PairScheme::kSingleVsMulti}) {
    if (s == to_string(p)) return p;
  }
  throw Error(Errc::kParse, where + ": unknown scheme '" + s + "'");
}

template <typename T>
void shuffle(std::vector<T>& items, SplitMix64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform(i));
    std::swap(items[i - 1], items[j]);
  }
}

std::string pair_id(const std::string& set, PairScheme scheme, const std::string& category,
                    std::size_t index) {
  char num[16];
  std::snprintf(num, sizeof num, "%05zu", index);
  return set + "-" + std::string(to_string(scheme)) + "-" + category + "-" + num;
}

}  // namespace

PairingResult build_pairs(const std::vector<ExtractionRecord>& records, PairScheme scheme,
                          std::uint64_t seed, const std::string& set) {
  std::map<std::string, std::vector<const ExtractionRecord*>> singles, multis;
  std::set<std::string> categories;
  for (const auto& r : records) {
    categories.insert(r.category);
    (r.scope == Scope::kSameSentence ? singles : multis)[r.category].push_back(&r);
  }

  PairingResult result;
  for (const auto& category : categories) {
    SplitMix64 rng(derive_seed(seed, set + "/" + std::string(to_string(scheme)) + "/" + category));
    auto emit = [&](PairSide first, PairSide second) {
      EvaluationPair p;
      p.pair_id = pair_id(set, scheme, category, result.pairs.size());
      p.category = category;
      p.set = set;
      p.scheme = scheme;
      if (rng.coin()) std::swap(first, second);
      p.side_a = std::move(first);
      p.side_b = std::move(second);
      result.pairs.push_back(std::move(p));
    };

    if (scheme == PairScheme::kSingleVsMulti) {
      auto s = singles[category];
      auto m = multis[category];
      if (s.empty() || m.empty()) {
        result.leftovers[category] = s.size() + m.size();
        continue;
      }
      shuffle(s, rng);
      shuffle(m, rng);
      const std::size_t n = std::min(s.size(), m.size());
      for (std::size_t i = 0; i < n; ++i) {
        emit({kLabelSingle, s[i]->span_text}, {kLabelMulti, m[i]->span_text});
      }
      result.leftovers[category] = s.size() + m.size() - 2 * n;
    } else {
      const bool single = scheme == PairScheme::kSingleVsBase;
      const auto& side = single ? singles[category] : multis[category];
      std::size_t unpaired = 0;
      for (const ExtractionRecord* r : side) {
        if (!r->baseline_text || r->baseline_text->empty() || r->span_text.empty()) {
          ++unpaired;
          continue;
        }
        emit({single ? kLabelSingle : kLabelMulti, r->span_text},
             {kLabelBaseline, *r->baseline_text});
      }
      result.leftovers[category] = unpaired;
    }
  }
  if (result.pairs.empty()) {
    throw Error(Errc::kInsufficientRecords,
                "no category has records on both sides of " + std::string(to_string(scheme)));
  }
  return result;
}

void write_pairs(std::ostream& out, const std::vector<EvaluationPair>& pairs) {
  for (const auto& p : pairs) {
    ordered_json j;
    j["pair_id"] = p.pair_id;
    j["category"] = p.category;
    j["side_a"] = {{"label", p.side_a.label}, {"text", p.side_a.text}};
    j["side_b"] = {{"label", p.side_b.label}, {"text", p.side_b.text}};
    j["set"] = p.set;
    j["scheme"] = std::string(to_string(p.scheme));
    out << j.dump() << '\n';
  }
}

std::vector<EvaluationPair> read_pairs(std::istream& in, const std::string& name) {
  std::vector<EvaluationPair> pairs;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = name + ":" + std::to_string(line_no);
    try {
      const auto j = nlohmann::json::parse(line);
      EvaluationPair p;
      p.pair_id = j.at("pair_id").get<std::string>();
      p.category = j.at("category").get<std::string>();
      p.side_a = {j.at("side_a").at("label").get<std::string>(),
                  j.at("side_a").at("text").get<std::string>()};
      p.side_b = {j.at("side_b").at("label").get<std::string>(),
                  j.at("side_b").at("text").get<std::string>()};
      p.set = j.value("set", std::string("seed"));
      const std::string scheme = j.value("scheme", std::string());
      if (!scheme.empty()) {
        p.scheme = parse_scheme(scheme, where);
      } else {
        // Infer from the labels when the scheme field is absent.
        const bool has_base = p.side_a.label == kLabelBaseline || p.side_b.label == kLabelBaseline;
        const bool has_single = p.side_a.label == kLabelSingle || p.side_b.label == kLabelSingle;
        p.scheme = !has_base ? PairScheme::kSingleVsMulti
                             : (has_single ? PairScheme::kSingleVsBase : PairScheme::kMultiVsBase);
      }
      if (p.side_a.label == p.side_b.label) {
        throw Error(Errc::kParse, where + ": both sides carry label '" + p.side_a.label + "'");
      }
      if (p.side_a.text.empty() || p.side_b.text.empty()) {
        throw Error(Errc::kParse, where + ": empty side text");
      }
      if (!ids.insert(p.pair_id).second) {
        throw Error(Errc::kParse, where + ": duplicate pair_id " + p.pair_id);
      }
      pairs.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::kParse, where + ": " + e.what());
    }
  }
  return pairs;
}

std::vector<EvaluationPair> read_pairs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kIo, "cannot open pairs " + path.string());
  return read_pairs(in, path.string());
}

std::string_view to_string(Choice c) {
  switch (c) {
    case Choice::kA: return "A";
    case Choice::kB: return "B";
    case Choice::kNeither: return "NEITHER";
  }
  return "NEITHER";
}

std::vector<JudgmentRecord> read_judgments(std::istream& in, const std::string& name) {
  std::vector<JudgmentRecord> out;
  std::set<std::pair<std::string, std::string>> seen;
  std::vector<std::string> errors;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) {
      const auto a = f.find_first_not_of(" \t");
      const auto b = f.find_last_not_of(" \t");
      fields.push_back(a == std::string::npos ? std::string() : f.substr(a, b - a + 1));
    }
    const std::string where = name + ":" + std::to_string(line_no);
    if (line_no == 1 && !fields.empty() && fields[0] == "pair_id") continue;
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty()) {
      errors.push_back(where + ": expected pair_id,annotator_id,choice");
      continue;
    }
    std::string choice = ascii_lower(fields[2]);
    JudgmentRecord r{fields[0], fields[1], Choice::kNeither};
    if (choice == "a") {
      r.choice = Choice::kA;
    } else if (choice == "b") {
      r.choice = Choice::kB;
    } else if (choice != "neither") {
      errors.push_back(where + ": choice must be A, B or NEITHER, got '" + fields[2] + "'");
      continue;
    }
    if (!seen.emplace(r.pair_id, r.annotator_id).second) {
      errors.push_back(where + ": duplicate judgment for (" + r.pair_id + ", " +
                       r.annotator_id + ")");
      continue;
    }
    out.push_back(std::move(r));
  }
  if (!errors.empty()) {
    std::string msg;
    for (const auto& e : errors) msg += (msg.empty() ? "" : "\n") + e;
    throw Error(Errc::kParse, msg);
  }
  return out;
}

std::vector<JudgmentRecord> read_judgments(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kIo, "cannot open judgments " + path.string());
  return read_judgments(in, path.string());
}

// ---------------------------------------------------------------------------

double PreferenceSummary::preference_rate() const {
  return total == 0 ? 0.0 : static_cast<double>(preferred()) / static_cast<double>(total);
}

std::optional<double> PreferenceSummary::proportion(const std::string& label) const {
  if (preferred() == 0) return std::nullopt;
  auto it = wins.find(label);
  const std::size_t w = it == wins.end() ? 0 : it->second;
  return static_cast<double>(w) / static_cast<double>(preferred());
}

PreferenceSummary summarize(const std::vector<JudgmentRecord>& judgments,
                            const std::vector<EvaluationPair>& pairs) {
  std::map<std::string, const EvaluationPair*> by_id;
  for (const auto& p : pairs) by_id[p.pair_id] = &p;

  PreferenceSummary summary;
  std::set<std::string> unknown;
  for (const auto& j : judgments) {
    auto it = by_id.find(j.pair_id);
    if (it == by_id.end()) {
      unknown.insert(j.pair_id);
      continue;
    }
    const EvaluationPair& p = *it->second;
    summary.wins.try_emplace(p.side_a.label, 0);
    summary.wins.try_emplace(p.side_b.label, 0);
    ++summary.total;
    switch (j.choice) {
      case Choice::kA: ++summary.wins[p.side_a.label]; break;
      case Choice::kB: ++summary.wins[p.side_b.label]; break;
      case Choice::kNeither: ++summary.neither; break;
    }
  }
  if (!unknown.empty()) {
    std::string msg = "judgments reference unknown pairs:";
    for (const auto& id : unknown) msg += " " + id;
    throw Error(Errc::kUnknownPair, msg);
  }
  return summary;
}

ChiSquareResult chi_square_preference(std::uint64_t count_x, std::uint64_t count_y) {
  if (count_x + count_y == 0) {
    throw Error(Errc::kEmptyComparison, "no non-Neither judgments to compare");
  }
  const double expected = static_cast<double>(count_x + count_y) / 2.0;
  const double dx = static_cast<double>(count_x) - expected;
  const double dy = static_cast<double>(count_y) - expected;
  ChiSquareResult r;
  r.chi2 = dx * dx / expected + dy * dy / expected;
  r.df = 1;
  r.p = chi2_survival(r.chi2, 1);
  return r;
}

namespace {

// Regularized upper incomplete gamma Q(a, x): series below a + 1, Lentz
// continued fraction above.
double gamma_q(double a, double x) {
  if (x <= 0.0) return 1.0;
  const double log_prefix = a * std::log(x) - x - std::lgamma(a);
  constexpr double kEps = 1e-16;
  if (x < a + 1.0) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 10000; ++n) {
      term *= x / (a + n);
      sum += term;
      if (std::fabs(term) < std::fabs(sum) * kEps) break;
    }
    return 1.0 - sum * std::exp(log_prefix);
  }
  constexpr double kTiny = std::numeric_limits<double>::min() / kEps;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) break;
  }
  return std::exp(log_prefix) * h;
}

}  // namespace

double chi2_survival(double x, int df) {
  if (!(x >= 0.0)) throw Error(Errc::kDomainError, "chi-square statistic must be >= 0");
  if (df < 1) throw Error(Errc::kDomainError, "degrees of freedom must be >= 1");
  if (df == 1) return std::erfc(std::sqrt(x / 2.0));
  return gamma_q(df / 2.0, x / 2.0);
}

double cohens_kappa(const std::vector<Choice>& first, const std::vector<Choice>& second) {
  if (first.size() != second.size()) {
    throw Error(Errc::kLengthMismatch, "annotation sequences differ in length");
  }
  if (first.empty()) throw Error(Errc::kEmptyInput, "no doubly annotated items");
  const double n = static_cast<double>(first.size());
  double m1[3] = {0, 0, 0};
  double m2[3] = {0, 0, 0};
  double agree = 0;
  for (std::size_t i = 0; i < first.size(); ++i) {
    m1[static_cast<int>(first[i])] += 1;
    m2[static_cast<int>(second[i])] += 1;
    agree += first[i] == second[i];
  }
  const double p_o = agree / n;
  double p_e = 0;
  for (int k = 0; k < 3; ++k) p_e += (m1[k] / n) * (m2[k] / n);
  if (p_e >= 1.0) return 1.0;  // both annotators used one identical label
  return (p_o - p_e) / (1.0 - p_e);
}

// ---------------------------------------------------------------------------

namespace {

struct ComparisonSpec {
  const char* code;
  const char* description;
  const char* set;
  PairScheme scheme;
};

constexpr ComparisonSpec kComparisons[] = {
    {"overall", "single v. multi (seed v. expand)", "all", PairScheme::kSingleVsMulti},
    {"sbs", "single v. baseline (seed)", "seed", PairScheme::kSingleVsBase},
    {"mbs", "multi v. baseline (seed)", "seed", PairScheme::kMultiVsBase},
    {"sms", "single v. multi (seed)", "seed", PairScheme::kSingleVsMulti},
    {"sbe", "single v. baseline (expand)", "expanded", PairScheme::kSingleVsBase},
    {"mbe", "multi v. baseline (expand)", "expanded", PairScheme::kMultiVsBase},
    {"sme", "single v. multi (expand)", "expanded", PairScheme::kSingleVsMulti},
};

std::pair<const char*, const char*> scheme_labels(PairScheme s) {
  switch (s) {
    case PairScheme::kSingleVsBase: return {kLabelSingle, kLabelBaseline};
    case PairScheme::kMultiVsBase: return {kLabelMulti, kLabelBaseline};
    case PairScheme::kSingleVsMulti: return {kLabelSingle, kLabelMulti};
  }
  return {kLabelSingle, kLabelMulti};
}

ordered_json summary_json(const PreferenceSummary& s) {
  ordered_json counts = ordered_json::object();
  for (const auto& [label, n] : s.wins) counts[label] = n;
  counts["neither"] = s.neither;
  ordered_json j;
  j["counts"] = counts;
  j["total"] = s.total;
  j["preference_rate"] = s.preference_rate();
  return j;
}

}  // namespace

EvalReport evaluate(const std::vector<EvaluationPair>& pairs,
                    const std::vector<JudgmentRecord>& judgments) {
  EvalReport report;
  report.overall = summarize(judgments, pairs);  // validates pair ids

  std::map<std::string, const EvaluationPair*> by_id;
  for (const auto& p : pairs) by_id[p.pair_id] = &p;

  for (const ComparisonSpec& spec : kComparisons) {
    std::vector<EvaluationPair> subset;
    for (const auto& p : pairs) {
      if (p.scheme == spec.scheme && (std::string(spec.set) == "all" || p.set == spec.set)) {
        subset.push_back(p);
      }
    }
    std::set<std::string> ids;
    for (const auto& p : subset) ids.insert(p.pair_id);
    std::vector<JudgmentRecord> js;
    for (const auto& j : judgments) {
      if (ids.count(j.pair_id) > 0) js.push_back(j);
    }
    ComparisonResult c;
    c.code = spec.code;
    c.description = spec.description;
    c.set = spec.set;
    c.scheme = spec.scheme;
    c.summary = summarize(js, subset);
    const auto [x, y] = scheme_labels(spec.scheme);
    c.summary.wins.try_emplace(x, 0);
    c.summary.wins.try_emplace(y, 0);
    if (c.summary.preferred() > 0) {
      c.test = chi_square_preference(c.summary.wins[x], c.summary.wins[y]);
    }
    report.comparisons.push_back(std::move(c));
  }

  // Doubly annotated pairs: the two lexicographically first annotators.
  std::map<std::string, std::map<std::string, Choice>> by_pair;
  for (const auto& j : judgments) by_pair[j.pair_id][j.annotator_id] = j.choice;
  std::map<std::string, std::pair<std::vector<Choice>, std::vector<Choice>>> per_category;
  for (const auto& [id, annotations] : by_pair) {
    if (annotations.size() < 2) continue;
    auto it = annotations.begin();
    auto& [first, second] = per_category[by_id.at(id)->category];
    first.push_back(it->second);
    second.push_back(std::next(it)->second);
  }
  for (const auto& [category, seqs] : per_category) {
    report.kappa.push_back({category, seqs.first.size(), cohens_kappa(seqs.first, seqs.second)});
  }
  return report;
}

std::string report_to_json(const EvalReport& report) {
  ordered_json j;
  j["overall"] = summary_json(report.overall);
  ordered_json comps = ordered_json::array();
  for (const auto& c : report.comparisons) {
    ordered_json e;
    e["code"] = c.code;
    e["description"] = c.description;
    e["set"] = c.set;
    e["scheme"] = std::string(to_string(c.scheme));
    const auto summary = summary_json(c.summary);
    e["counts"] = summary["counts"];
    e["total"] = summary["total"];
    e["preference_rate"] = summary["preference_rate"];
    if (c.test) {
      e["chi2"] = c.test->chi2;
      e["df"] = c.test->df;
      e["p"] = c.test->p;
    } else {
      e["chi2"] = nullptr;
      e["df"] = 1;
      e["p"] = nullptr;
    }
    comps.push_back(std::move(e));
  }
  j["comparisons"] = std::move(comps);
  ordered_json kappa;
  kappa["available"] = !report.kappa.empty();
  ordered_json cats = ordered_json::array();
  for (const auto& k : report.kappa) {
    cats.push_back({{"category", k.category}, {"items", k.items}, {"kappa", k.kappa}});
  }
  kappa["categories"] = std::move(cats);
  j["kappa"] = std::move(kappa);
  return j.dump(2);
}

}  // namespace riskmine
