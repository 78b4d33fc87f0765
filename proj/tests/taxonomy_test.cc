#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "riskmine/error.h"
#include "riskmine/taxonomy.h"

using namespace riskmine;

namespace {

Taxonomy parse(const std::string& tsv) {
  std::istringstream in(tsv);
  return parse_taxonomy(in, "t.tsv");
}

EntityList entities(const std::string& text) {
  std::istringstream in(text);
  return parse_entities(in, "e.txt");
}

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::kIo;
}

const char* kSeed =
    "# category\tterm\tprovenance\tstatus\n"
    "cybersecurity\thack\tseed\tactive\n"
    "cybersecurity\tdata breach\tseed\tactive\n"
    "terrorism\tbio-terrorism\tseed\tactive\n"
    "terrorism\tcar bombing\tseed\tactive\n"
    "legal\tlitigation\tseed\tactive\n";

}  // namespace

TEST_CASE("load: inflected duplicates collapse onto one lemma sequence") {
  const auto t = parse("cybersecurity\thack\tseed\tactive\ncybersecurity\thacks\tseed\tactive\n");
  REQUIRE(t.terms().size() == 1);
  CHECK(t.terms()[0].term == "hack");
  CHECK(t.terms()[0].lemma_tokens == std::vector<std::string>{"hack"});
}

TEST_CASE("load: duplicate keeps seed provenance and strongest status") {
  const auto t = parse(
      "legal\tlawsuit\texpanded\tcandidate\n"
      "legal\tlawsuits\tseed\tactive\n");
  REQUIRE(t.terms().size() == 1);
  CHECK(t.terms()[0].provenance == Provenance::kSeed);
  CHECK(t.terms()[0].status == TermStatus::kActive);
}

TEST_CASE("load: 26 seed rows make 26 active terms") {
  std::string tsv;
  for (int i = 0; i < 26; ++i) tsv += "cybersecurity\tterm" + std::to_string(i) + "\tseed\tactive\n";
  const auto t = parse(tsv);
  CHECK(t.count(TermStatus::kActive) == 26);
  CHECK(t.live_count("cybersecurity") == 26);
}

TEST_CASE("load: errors") {
  CHECK(code_of([] { parse(""); }) == Errc::kEmptyTaxonomy);
  CHECK(code_of([] { parse("legal\tfoo\texpanded\tcandidate\n"); }) == Errc::kEmptyTaxonomy);
  try {
    parse("legal\tlitigation\tseed\tactive\nlegal\tbroken row\n");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kParse);
    CHECK(std::string(e.what()).find("t.tsv:2") != std::string::npos);
  }
  CHECK(code_of([] { parse("legal\tx\tseed\tmaybe\n"); }) == Errc::kParse);
  CHECK(code_of([] { parse("legal\t\tseed\tactive\n"); }) == Errc::kParse);
}

TEST_CASE("save then load is the identity on the normalized taxonomy") {
  auto t = parse(kSeed);
  t = merge_expansion(t, {{"cybersecurity", "hack", "cloakware", 0.8125},
                          {"legal", "litigation", "counter suit", 0.5}});
  t = curate(t, {"legal", "counter suit"}, Decision::kReject);
  std::ostringstream out;
  write_taxonomy(out, t);
  const auto back = parse(out.str());
  CHECK(back == t);
}

TEST_CASE("entities: aliases, normalization and errors") {
  const auto one = entities("Verizon\n");
  REQUIRE(one.size() == 1);
  CHECK(one.entities[0].aliases.size() == 1);

  const auto cnn = entities("CNN|Cable News Network\n");
  REQUIRE(cnn.size() == 1);
  CHECK(cnn.entities[0].canonical_name == "CNN");
  CHECK(cnn.entities[0].alias_lemmas.size() == 2);
  CHECK(cnn.entities[0].alias_lemmas[1] == std::vector<std::string>{"cable", "news", "network"});

  std::string hundred;
  for (int i = 0; i < 100; ++i) hundred += "Company" + std::to_string(i) + "\n";
  CHECK(entities(hundred).size() == 100);

  CHECK(code_of([] { entities("# nothing\n\n"); }) == Errc::kEmptyEntityList);
  CHECK(code_of([] { entities("Acme|ACME Corp\nOther|acme corp\n"); }) == Errc::kParse);
  CHECK(code_of([] { entities("Acme\nAcme\n"); }) == Errc::kParse);
}

TEST_CASE("merge_expansion cleanup filters") {
  const auto seed = parse(kSeed);
  const std::size_t before = seed.terms().size();

  SUBCASE("punctuation variant of an existing term is dropped") {
    const auto t = merge_expansion(seed, {{"cybersecurity", "hack", "hack,", 0.9}});
    CHECK(t.terms().size() == before);
  }
  SUBCASE("joined-word variant is dropped") {
    const auto t = merge_expansion(seed, {{"cybersecurity", "hack", "databreach", 0.9}});
    CHECK(t.terms().size() == before);
  }
  SUBCASE("new vocabulary enters as an expanded candidate") {
    const auto t = merge_expansion(seed, {{"cybersecurity", "hack", "keylogger", 0.7}});
    REQUIRE(t.terms().size() == before + 1);
    const auto* term = t.find("cybersecurity", {"keylogger"});
    REQUIRE(term != nullptr);
    CHECK(term->provenance == Provenance::kExpanded);
    CHECK(term->status == TermStatus::kCandidate);
    CHECK(term->source_term == std::optional<std::string>("hack"));
    CHECK(t.count(TermStatus::kActive) == seed.count(TermStatus::kActive));
  }
  SUBCASE("candidates equal to seeds leave the taxonomy unchanged") {
    const auto t = merge_expansion(seed, {{"cybersecurity", "hack", "hacks", 0.9},
                                          {"legal", "litigation", "Litigation", 0.9}});
    CHECK(t == seed);
  }
  SUBCASE("no-letter candidates and underscore phrases") {
    const auto t = merge_expansion(seed, {{"terrorism", "car bombing", "1999", 0.9},
                                          {"terrorism", "car bombing", "bomb_maker", 0.8}});
    REQUIRE(t.terms().size() == before + 1);
    CHECK(t.find("terrorism", {"bomb", "maker"}) != nullptr);
  }
}

TEST_CASE("curate: accept, reject and errors") {
  auto t = merge_expansion(parse(kSeed), {{"cybersecurity", "hack", "4front security", 0.6},
                                          {"cybersecurity", "hack", "cloakware", 0.5}});
  t = curate(t, {"cybersecurity", "4front security"}, Decision::kAccept);
  CHECK(t.find("cybersecurity", {"4front", "security"})->status == TermStatus::kActive);

  t = curate(t, {"cybersecurity", "cloakware"}, Decision::kReject);
  CHECK(t.find("cybersecurity", {"cloakware"})->status == TermStatus::kRejected);

  // Re-expansion does not resurrect the rejected term.
  const auto again = merge_expansion(t, {{"cybersecurity", "hack", "cloakware", 0.5}});
  CHECK(again.find("cybersecurity", {"cloakware"})->status == TermStatus::kRejected);
  CHECK(again.terms().size() == t.terms().size());

  CHECK(code_of([&] { curate(t, {"cybersecurity", "hack"}, Decision::kReject); }) ==
        Errc::kNotACandidate);
  CHECK(code_of([&] { curate(t, {"cybersecurity", "zzz"}, Decision::kAccept); }) ==
        Errc::kUnknownTerm);
}

TEST_CASE("decisions log: append, read back, replay") {
  const auto path = std::filesystem::temp_directory_path() / "riskmine_decisions_test.log";
  std::filesystem::remove(path);
  CHECK(read_decisions(path).empty());
  append_decision(path, {"cloakware", "cybersecurity", Decision::kReject, {}});
  append_decision(path, {"4front security", "cybersecurity", Decision::kAccept, {}});
  const auto log = read_decisions(path);
  REQUIRE(log.size() == 2);
  CHECK(log[0].decision == Decision::kReject);
  CHECK(!log[0].timestamp.empty());

  auto t = merge_expansion(parse(kSeed), {{"cybersecurity", "hack", "4front security", 0.6},
                                          {"cybersecurity", "hack", "cloakware", 0.5},
                                          {"cybersecurity", "hack", "keylogger", 0.4}});
  CHECK(apply_decisions(t, log) == 2);
  CHECK(t.find("cybersecurity", {"cloakware"})->status == TermStatus::kRejected);
  CHECK(t.find("cybersecurity", {"4front", "security"})->status == TermStatus::kActive);
  CHECK(t.find("cybersecurity", {"keylogger"})->status == TermStatus::kCandidate);
  std::filesystem::remove(path);
}

TEST_CASE("expansion report arithmetic") {
  const auto r = expansion_report_from_counts({{"cybersecurity", 26, 123, 0},
                                               {"terrorism", 37, 147, 0},
                                               {"legal", 38, 162, 0}});
  REQUIRE(r.categories.size() == 3);
  // Independent recomputation of (after - before) / before * 100.
  CHECK(r.categories[0].percent == doctest::Approx(9700.0 / 26.0));
  CHECK(std::abs(r.categories[0].percent - 373.1) <= 0.1);
  CHECK(std::abs(r.categories[1].percent - 297.3) <= 0.1);
  CHECK(std::abs(r.categories[2].percent - 326.3) <= 0.1);
  CHECK(r.average_percent == doctest::Approx((9700.0 / 26 + 11000.0 / 37 + 12400.0 / 38) / 3));

  const auto seed = parse(kSeed);
  for (const auto& c : expansion_report(seed, seed).categories) CHECK(c.percent == 0.0);

  CHECK(code_of([] { expansion_report_from_counts({{"x", 0, 3, 0}}); }) ==
        Errc::kDivisionByZero);
}

TEST_CASE("expansion is monotone and never touches seeds") {
  const auto seed = parse(kSeed);
  const auto t = merge_expansion(seed, {{"legal", "litigation", "appropriation", 0.3},
                                        {"legal", "litigation", "litigations", 0.3}});
  for (const auto& s : seed.terms()) {
    const auto* now = t.find(s.category, s.lemma_tokens);
    REQUIRE(now != nullptr);
    CHECK(*now == s);
  }
  for (const auto& cat : seed.categories()) CHECK(t.live_count(cat) >= seed.live_count(cat));
}
