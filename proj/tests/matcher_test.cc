#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <sstream>

#include "oracle/brute_force.h"
#include "oracle/synthetic.h"
#include "riskmine/matcher.h"

using namespace riskmine;

namespace {

Occurrence occ(std::size_t s, std::size_t e, std::size_t phrase = 0) {
  return {phrase, phrase, s, e};
}

Taxonomy taxonomy_of(const std::string& tsv) {
  std::istringstream in(tsv);
  return parse_taxonomy(in, "t");
}

EntityList entities_of(const std::string& text) {
  std::istringstream in(text);
  return parse_entities(in, "e");
}

Document doc_of(const std::string& text) { return ingest_document({"d", text, std::nullopt}); }

}  // namespace

TEST_CASE("find_occurrences") {
  const Document doc = doc_of("CNN received a pipe bomb");
  PhraseSet set;
  set.add({"pipe", "bomb"}, 0);
  CHECK(find_occurrences(doc, set) == std::vector<Occurrence>{occ(3, 5)});

  PhraseSet absent;
  absent.add({"lawsuit"}, 0);
  CHECK(find_occurrences(doc, absent).empty());

  PhraseSet hack;
  hack.add({"hack"}, 0);
  CHECK(find_occurrences(doc_of("hack hack hack"), hack) ==
        std::vector<Occurrence>{occ(0, 1), occ(1, 2), occ(2, 3)});

  // Greedy disjoint runs of a self-overlapping phrase; distinct phrases may overlap.
  PhraseSet overlap;
  overlap.add({"a", "a"}, 0);
  overlap.add({"a"}, 1);
  const auto got = find_occurrences(doc_of("a a a"), overlap);
  CHECK(got == std::vector<Occurrence>{{1, 1, 0, 1}, {0, 0, 0, 2}, {1, 1, 1, 2}, {1, 1, 2, 3}});
}

TEST_CASE("pair_nearest looks both ways and breaks ties toward the preceding entity") {
  auto m = pair_nearest({occ(10, 11)}, {occ(2, 3), occ(15, 16)});
  REQUIRE(m.size() == 1);
  CHECK(m[0].entity == occ(15, 16));
  CHECK(m[0].distance == 4);

  m = pair_nearest({occ(10, 11)}, {occ(6, 7), occ(14, 15)});
  REQUIRE(m.size() == 1);
  CHECK(m[0].entity == occ(6, 7));
  CHECK(m[0].distance == 3);

  m = pair_nearest({occ(0, 1)}, {occ(40, 41)});
  REQUIRE(m.size() == 1);
  CHECK(m[0].distance == 39);

  CHECK(pair_nearest({occ(0, 1)}, {}).empty());

  // One entity may serve several keywords.
  m = pair_nearest({occ(0, 1), occ(4, 5)}, {occ(2, 3)});
  REQUIRE(m.size() == 2);
  CHECK(m[0].entity == m[1].entity);
}

TEST_CASE("token_distance") {
  CHECK(token_distance(occ(3, 5), occ(0, 1)) == 2);
  CHECK(token_distance(occ(0, 1), occ(3, 5)) == 2);
  CHECK(token_distance(occ(0, 1), occ(1, 2)) == 0);
  CHECK(token_distance(occ(2, 4), occ(2, 4)) == 0);
  CHECK(token_distance(occ(2, 6), occ(4, 9)) == 0);
}

TEST_CASE("filter_by_cutoff keeps distances at or under the cutoff") {
  std::vector<Match> ms(3);
  ms[0].distance = 4;
  ms[1].distance = 100;
  ms[2].distance = 101;
  const auto kept = filter_by_cutoff(ms, 100);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].distance == 4);
  CHECK(kept[1].distance == 100);

  ms[0].distance = 0;
  CHECK(filter_by_cutoff(ms, 0).size() == 1);
  CHECK(filter_by_cutoff({}, 100).empty());
}

TEST_CASE("extract on the worked examples") {
  const auto tax = taxonomy_of(
      "terrorism\tpipe bomb\tseed\tactive\n"
      "legal\tsettlement\tseed\tactive\n"
      "legal\tlawsuit\tseed\tactive\n");
  const auto ents = entities_of("CNN|Cable News Network\nVerizon\n");

  const Document one = doc_of(
      "Later Wednesday, CNN received a pipe bomb at its Time Warner Center headquarters in "
      "Manhattan.");
  const auto recs = extract(one, tax, ents, 100);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].entity == "CNN");
  CHECK(recs[0].keyword == "pipe bomb");
  CHECK(recs[0].category == "terrorism");
  CHECK(recs[0].scope == Scope::kSameSentence);
  CHECK(recs[0].distance == 2);
  CHECK(recs[0].span_text == one.text);

  const Document two = doc_of(
      "McDonald says this treatment violated the terms of a settlement the company reached a "
      "few years earlier. In 2011, Verizon agreed to pay $20 million to settle a class-action "
      "lawsuit by the federal commission.");
  const auto vr = extract(two, tax, ents, 100);
  REQUIRE(vr.size() == 2);
  CHECK(vr[0].keyword == "settlement");
  CHECK(vr[0].scope == Scope::kMultiSentence);
  CHECK(vr[0].first_sentence == 0);
  CHECK(vr[0].last_sentence == 1);
  CHECK(vr[0].span_text == two.text);
  CHECK(vr[1].keyword == "lawsuit");
  CHECK(vr[1].scope == Scope::kSameSentence);

  CHECK(extract(doc_of("A pipe bomb exploded."), tax, ents, 100).empty());

  // Rejected and candidate terms do not participate.
  const auto cand = taxonomy_of(
      "terrorism\tpipe bomb\texpanded\tcandidate\nlegal\tlawsuit\tseed\tactive\n");
  CHECK(extract(one, cand, ents, 100).empty());
}

TEST_CASE("retrieve_span reconstructs sentence ranges from offsets") {
  const Document doc = doc_of("S0 x. S1 CNN here. S2 y. S3 z. S4 bomb now. S5 end.");
  Match m;
  m.keyword = occ(doc.sentences[4].begin + 1, doc.sentences[4].begin + 2);
  m.entity = occ(doc.sentences[2].begin, doc.sentences[2].begin + 1);
  const auto span = retrieve_span(m, doc);
  CHECK(span.first_sentence == 2);
  CHECK(span.last_sentence == 4);
  CHECK(span.text == "S2 y. S3 z. S4 bomb now.");
  CHECK(span.text == oracle::concatenated_span(doc, 2, 4));
  CHECK(classify_scope(m, doc) == Scope::kMultiSentence);

  m.entity = occ(doc.sentences[4].begin, doc.sentences[4].begin + 1);
  CHECK(retrieve_span(m, doc).text == "S4 bomb now.");
  CHECK(classify_scope(m, doc) == Scope::kSameSentence);
}

TEST_CASE("extract equals the all-pairs oracle on random documents") {
  oracle::SyntheticOptions opt;
  opt.docs = 300;
  opt.max_tokens = 600;
  opt.keywords = 40;
  opt.entities = 30;
  opt.seed = 99;
  const auto corpus = oracle::make_corpus(opt);
  const Extractor extractor(corpus.taxonomy, corpus.entities);
  std::size_t total = 0;
  for (const auto& raw : corpus.docs) {
    const Document doc = ingest_document(raw);
    for (std::size_t cutoff : {std::size_t{0}, std::size_t{5}, std::size_t{100}}) {
      const auto got = extractor.extract(doc, cutoff);
      const auto want = oracle::all_pairs_extract(doc, corpus.taxonomy, corpus.entities, cutoff);
      CHECK(got == want);
      total += got.size();
    }
  }
  CHECK(total > 0);
}

TEST_CASE("pair_nearest probe count grows sub-linearly in entity occurrences") {
  // Fixed 200 keywords; entity occurrence lists of growing length.
  auto probes_for = [](std::size_t entity_count) {
    std::vector<Occurrence> kws, ents;
    for (std::size_t i = 0; i < 200; ++i) kws.push_back(occ(i * 97 % 100000, i * 97 % 100000 + 1));
    std::sort(kws.begin(), kws.end(),
              [](const Occurrence& a, const Occurrence& b) { return a.start < b.start; });
    const std::size_t step = 100000 / entity_count;
    for (std::size_t i = 0; i < entity_count; ++i) ents.push_back(occ(i * step + 1, i * step + 2));
    MatchCounters c;
    pair_nearest(kws, ents, &c);
    return static_cast<double>(c.probes);
  };
  const double p1 = probes_for(100);
  const double p2 = probes_for(10000);
  // 100x more entities: linear work would be ~100x, logarithmic ~2x.
  CHECK(p2 / p1 < 5.0);
  CHECK(p2 < 200.0 * 10000.0 / 10.0);
}
