#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "partout/error.hpp"
#include "partout/rdf/compare.hpp"
#include "partout/rdf/ntriples.hpp"
#include "partout/rdf/triple_store.hpp"

using namespace partout;
using namespace partout::rdf;

namespace {

TripleStore random_store(std::mt19937_64& rng, std::size_t n, TermId max_id) {
  std::uniform_int_distribution<TermId> id(1, max_id);
  TripleStore store;
  for (std::size_t i = 0; i < n; ++i) store.insert({id(rng), id(rng), id(rng)});
  return store;
}

std::vector<Triple> brute_force(const std::vector<Triple>& all, const IdPattern& p) {
  std::vector<Triple> out;
  for (const auto& t : all) {
    if (p.matches(t)) out.push_back(t);
  }
  return out;
}

bool sorted_in(const std::vector<Triple>& v, IndexOrder order) {
  auto comps = components(order);
  auto key = [&](const Triple& t) {
    return std::array{component_of(t, comps[0]), component_of(t, comps[1]),
                      component_of(t, comps[2])};
  };
  return std::is_sorted(v.begin(), v.end(),
                        [&](const Triple& a, const Triple& b) { return key(a) < key(b); });
}

}  // namespace

TEST(NTriples, AssignsIdsInFirstOccurrenceOrder) {
  Dictionary dict;
  std::istringstream in("<a> <p> \"x\" .\n");
  auto triples = parse_ntriples(in, dict);
  ASSERT_EQ(triples.size(), 1u);
  EXPECT_EQ(triples[0], (Triple{1, 2, 3}));
  EXPECT_EQ(dict.term(1), Term::iri("a"));
  EXPECT_EQ(dict.term(2), Term::iri("p"));
  EXPECT_EQ(dict.term(3), Term::plain_literal("x"));
}

TEST(NTriples, SecondParseReusesIdsAndStoreRejectsDuplicate) {
  Dictionary dict;
  TripleStore store;
  std::istringstream first("<a> <p> \"x\" .\n");
  std::istringstream second("<a> <p> \"x\" .\n");
  auto a = parse_ntriples(first, dict);
  auto b = parse_ntriples(second, dict);
  EXPECT_EQ(a, b);
  EXPECT_TRUE(store.insert(a[0]));
  EXPECT_FALSE(store.insert(b[0]));
  EXPECT_EQ(dict.size(), 3u);
}

TEST(NTriples, LiteralSubjectIsRejectedWithLineNumber) {
  Dictionary dict;
  std::istringstream in("<a> <p> <b> .\n\"x\" <p> <a> .\n");
  try {
    parse_ntriples(in, dict);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.reason(), "literal subject");
  }
}

TEST(NTriples, RejectsLiteralProperty) {
  Dictionary dict;
  std::istringstream in("<a> \"p\" <b> .\n");
  EXPECT_THROW(parse_ntriples(in, dict), ParseError);
}

TEST(NTriples, RejectsMissingDot) {
  Dictionary dict;
  std::istringstream in("<a> <p> <b>\n");
  EXPECT_THROW(parse_ntriples(in, dict), ParseError);
}

TEST(NTriples, SkipsCommentsAndBlankLinesAndKeepsLiteralSuffixes) {
  Dictionary dict;
  std::istringstream in(
      "# header\n\n<a> <p> \"5\"^^<http://www.w3.org/2001/XMLSchema#integer> .\n"
      "_:b1 <p> \"hallo\"@de . # trailing\n");
  auto triples = parse_ntriples(in, dict);
  ASSERT_EQ(triples.size(), 2u);
  EXPECT_EQ(dict.term(triples[0].o).lexical,
            "\"5\"^^<http://www.w3.org/2001/XMLSchema#integer>");
  EXPECT_EQ(dict.term(triples[1].s), Term::iri("_:b1"));
  EXPECT_EQ(dict.term(triples[1].o).lexical, "\"hallo\"@de");
}

TEST(NTriples, FormatRoundTrips) {
  Dictionary dict;
  std::string text =
      "<a> <p> \"x \\\"y\\\"\" .\n_:n <q> <b> .\n<a> <r> \"1.5\"^^<http://www.w3.org/2001/XMLSchema#decimal> .\n";
  std::istringstream in(text);
  TripleStore store;
  for (const auto& t : parse_ntriples(in, dict)) store.insert(t);
  std::ostringstream out;
  write_ntriples(out, store, dict);
  Dictionary dict2;
  std::istringstream back(out.str());
  TripleStore store2;
  for (const auto& t : parse_ntriples(back, dict2)) store2.insert(t);
  EXPECT_EQ(store2.size(), store.size());
  for (const auto& t : store.triples()) {
    Triple mapped{*dict2.find(dict.term(t.s)), *dict2.find(dict.term(t.p)),
                  *dict2.find(dict.term(t.o))};
    EXPECT_TRUE(store2.contains(mapped));
  }
}

TEST(DictionaryFile, WritesAndReadsBack) {
  Dictionary dict;
  dict.intern(Term::iri("http://x/a"));
  dict.intern(Term::plain_literal("hello world"));
  std::ostringstream out;
  dict.write(out);
  EXPECT_EQ(out.str(), "1\tiri\thttp://x/a\n2\tliteral\t\"hello world\"\n");
  std::istringstream in(out.str());
  EXPECT_EQ(Dictionary::read(in), dict);
}

TEST(DictionaryFile, RejectsGaps) {
  std::istringstream in("1\tiri\ta\n3\tiri\tb\n");
  EXPECT_THROW(Dictionary::read(in), ParseError);
}

TEST(TripleStore, InsertThenDeleteRestoresOriginal) {
  TripleStore store;
  store.insert({1, 2, 3});
  TripleStore original = store;
  EXPECT_TRUE(store.insert({4, 5, 6}));
  EXPECT_TRUE(store.erase({4, 5, 6}));
  EXPECT_EQ(store, original);
  EXPECT_FALSE(store.erase({4, 5, 6}));
  EXPECT_EQ(store, original);
}

TEST(TripleStore, ScanPosGivesSubjectsInIncreasingOrder) {
  TripleStore store;
  store.insert({9, 1, 2});
  store.insert({3, 1, 2});
  store.insert({5, 1, 7});
  store.insert({4, 1, 2});
  auto rows = store.scan({std::nullopt, 1, 2}, IndexOrder::POS);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].s, 3u);
  EXPECT_EQ(rows[1].s, 4u);
  EXPECT_EQ(rows[2].s, 9u);
  EXPECT_TRUE(store.scan({std::nullopt, 8, 2}, IndexOrder::POS).empty());
}

TEST(TripleStore, ScanRejectsIncompatibleOrder) {
  TripleStore store;
  store.insert({1, 2, 3});
  EXPECT_THROW(store.scan({std::nullopt, 2, 3}, IndexOrder::SPO), std::invalid_argument);
  EXPECT_NO_THROW(store.scan({std::nullopt, 2, 3}, IndexOrder::OPS));
}

TEST(TripleStore, FullScanIsSpoOrder) {
  std::mt19937_64 rng(3);
  auto store = random_store(rng, 500, 20);
  auto rows = store.scan({}, IndexOrder::SPO);
  EXPECT_EQ(rows, store.triples());
  EXPECT_EQ(rows.size(), store.size());
}

TEST(TripleStore, ScanAndCardinalityMatchBruteForce) {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 5; ++round) {
    auto store = random_store(rng, 2000, 15);
    auto all = store.triples();
    std::uniform_int_distribution<TermId> id(1, 16);
    for (int i = 0; i < 60; ++i) {
      IdPattern p;
      if (rng() % 2) p.s = id(rng);
      if (rng() % 2) p.p = id(rng);
      if (rng() % 2) p.o = id(rng);
      auto expected = brute_force(all, p);
      EXPECT_EQ(store.cardinality(p), expected.size());
      for (IndexOrder order : kAllOrders) {
        if (!order_compatible(p, order)) continue;
        auto got = store.scan(p, order);
        EXPECT_TRUE(sorted_in(got, order));
        std::sort(got.begin(), got.end());
        EXPECT_EQ(got, expected);
      }
    }
  }
}

TEST(TripleStore, IndexesStayIdenticalUnderUpdates) {
  std::mt19937_64 rng(5);
  TripleStore store;
  std::uniform_int_distribution<TermId> id(1, 8);
  for (int i = 0; i < 3000; ++i) {
    Triple t{id(rng), id(rng), id(rng)};
    if (rng() % 3 == 0) {
      store.erase(t);
    } else {
      store.insert(t);
    }
  }
  auto reference = store.index_content(IndexOrder::SPO);
  for (IndexOrder order : kAllOrders) {
    auto content = store.index_content(order);
    EXPECT_TRUE(sorted_in(content, order));
    std::sort(content.begin(), content.end());
    EXPECT_EQ(content, reference);
  }
  for (TermId p = 1; p <= 8; ++p) {
    EXPECT_EQ(store.property_count(p), brute_force(reference, {std::nullopt, p, std::nullopt}).size());
    for (TermId o = 1; o <= 8; ++o) {
      EXPECT_EQ(store.property_object_count(p, o), brute_force(reference, {std::nullopt, p, o}).size());
      EXPECT_EQ(store.property_subject_count(p, o), brute_force(reference, {o, p, std::nullopt}).size());
    }
  }
}

TEST(TripleStore, SampleFractionOneIsIdentical) {
  std::mt19937_64 rng(1);
  auto store = random_store(rng, 1000, 30);
  EXPECT_EQ(store.sample(1.0, 42), store);
}

TEST(TripleStore, SampleIsDeterministicAndWithinBinomialBound) {
  TripleStore store;
  for (TermId i = 1; i <= 100000; ++i) store.insert({i, 1, 2});
  auto a = store.sample(0.1, 99);
  auto b = store.sample(0.1, 99);
  EXPECT_EQ(a, b);
  double sigma = std::sqrt(100000 * 0.1 * 0.9);
  EXPECT_LE(std::abs(static_cast<double>(a.size()) - 10000.0), 5 * sigma);
  EXPECT_THROW(store.sample(0.0, 1), std::invalid_argument);
  EXPECT_THROW(store.sample(1.5, 1), std::invalid_argument);
}

TEST(Compare, NumericAndCategoryRules) {
  auto n = [](const char* v) { return Term::typed_literal(v, kXsdInteger); };
  EXPECT_TRUE(compare(n("2000000000"), CompareOp::GreaterEq, n("1000000000")));
  EXPECT_FALSE(compare(n("999"), CompareOp::GreaterEq, n("1000000000")));
  EXPECT_TRUE(compare(Term::plain_literal("10"), CompareOp::Greater, n("9")));
  EXPECT_FALSE(compare(Term::iri("http://x"), CompareOp::Greater, n("9")));
  EXPECT_FALSE(compare(Term::plain_literal("abc"), CompareOp::Less, n("9")));
  EXPECT_TRUE(compare(Term::plain_literal("abc"), CompareOp::Less, Term::plain_literal("abd")));
  EXPECT_FALSE(compare(n("5"), CompareOp::Equal, Term::plain_literal("5")));
  EXPECT_TRUE(compare(Term::iri("b"), CompareOp::Equal, Term::iri("b")));
}
