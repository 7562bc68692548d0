#include <gtest/gtest.h>

#include <random>
#include <regex>
#include <set>
#include <sstream>

#include "partout/bench/example.hpp"
#include "partout/workload/analyzer.hpp"
#include "support/example_fixture.hpp"

using namespace partout;
using namespace partout::workload;
using partout::testing::db;
using partout::testing::example_data;

namespace {

const rdf::Term kType = rdf::Term::iri(std::string(rdf::kRdfType));

AnonPattern anon(std::optional<rdf::Term> s, std::optional<rdf::Term> p, std::optional<rdf::Term> o) {
  return {std::move(s), std::move(p), std::move(o)};
}

// Independent count: textual occurrences of a token in each query body,
// weighted by the multiplicity given on the preceding "#x" line.
std::uint64_t textual_count(const std::string& log_text, const std::string& token) {
  std::uint64_t total = 0;
  std::stringstream in(log_text);
  std::string line;
  std::uint64_t mult = 1;
  while (std::getline(in, line)) {
    if (line == "###") {
      mult = 1;
    } else if (line.rfind("#x ", 0) == 0) {
      mult = std::stoull(line.substr(3));
    } else if (line.rfind("PREFIX", 0) != 0) {
      for (std::size_t pos = line.find(token); pos != std::string::npos; pos = line.find(token, pos + 1)) {
        total += mult;
      }
    }
  }
  return total;
}

}  // namespace

TEST(ConstantFrequencies, WorkedExample) {
  auto freq = constant_frequencies(example_data().log);
  std::string text = bench::example_query_log();
  EXPECT_EQ(freq.subject_object.at(db("Germany")), textual_count(text, "db:Germany"));
  EXPECT_EQ(freq.subject_object.at(db("Germany")), 3u);
  EXPECT_EQ(freq.subject_object.at(db("city")), 3u);
  EXPECT_EQ(freq.subject_object.at(rdf::Term::plain_literal("Apple")), 10u);
  EXPECT_EQ(freq.subject_object.at(db("USA")), 1u);
  EXPECT_EQ(freq.subject_object.at(db("company")), 1u);
  EXPECT_EQ(freq.subject_object.size(), 5u);  // filter constants are not pattern constants
  EXPECT_EQ(freq.property.at(db("revenue")), textual_count(text, "db:revenue"));
}

TEST(ConstantFrequencies, EmptyAndMultiplicity) {
  EXPECT_TRUE(constant_frequencies({}).subject_object.empty());
  QueryLog log{{sparql::parse_sparql("SELECT * WHERE { ?s <p> <c> }"), 5}};
  EXPECT_EQ(constant_frequencies(log).subject_object.at(rdf::Term::iri("c")), 5u);
}

TEST(Normalize, ThresholdTwoReplacesRareConstants) {
  auto phi = normalize_and_anonymize(example_data().log, 2);
  PatternFrequencies expected{
      {anon(std::nullopt, kType, db("city")), 3},
      {anon(std::nullopt, db("located"), db("Germany")), 3},
      {anon(std::nullopt, db("name"), std::nullopt), 3},
      {anon(std::nullopt, db("located"), std::nullopt), 1},
      {anon(std::nullopt, db("population"), std::nullopt), 1},
      {anon(std::nullopt, kType, std::nullopt), 1},
      {anon(std::nullopt, db("revenue"), std::nullopt), 11},
      {anon(std::nullopt, db("name"), rdf::Term::plain_literal("Apple")), 10},
  };
  EXPECT_EQ(phi, expected);
}

TEST(Normalize, ThresholdOneKeepsEverything) {
  auto phi = normalize_and_anonymize(example_data().log, 1);
  EXPECT_TRUE(phi.contains(anon(std::nullopt, db("located"), db("USA"))));
  EXPECT_TRUE(phi.contains(anon(std::nullopt, kType, db("company"))));
}

TEST(Normalize, ReplacedConstantsDoNotJoin) {
  QueryLog log{{sparql::parse_sparql("SELECT * WHERE { ?a <p> <x> . ?b <q> <x> }"), 1}};
  auto g = build_global_query_graph(log, 2);
  EXPECT_TRUE(g.edges.empty());
}

TEST(GlobalQueryGraph, WorkedExampleEdges) {
  auto g = build_global_query_graph(example_data().log, 2);
  auto apple = anon(std::nullopt, db("name"), rdf::Term::plain_literal("Apple"));
  auto revenue = anon(std::nullopt, db("revenue"), std::nullopt);
  auto city = anon(std::nullopt, kType, db("city"));
  auto germany = anon(std::nullopt, db("located"), db("Germany"));
  EXPECT_EQ(g.weight(apple, revenue), 10u);
  EXPECT_EQ(g.weight(revenue, apple), 10u);
  EXPECT_EQ(g.weight(city, germany), 2u);
  EXPECT_EQ(g.weight(anon(std::nullopt, db("name"), std::nullopt), revenue), 1u);
  EXPECT_EQ(g.weight(anon(std::nullopt, kType, std::nullopt), germany), 1u);
  // three triangle edges of query 1, two of query 2, one each for queries 3-5
  EXPECT_EQ(g.edges.size(), 3u + 3u + 1u + 1u + 1u);
  std::ostringstream dump;
  g.write(dump);
  EXPECT_NE(dump.str().find("(Ω, <http://example.org/db/name>, \"Apple\")\t"), std::string::npos);
}

TEST(GlobalQueryGraph, SinglePatternQueryHasNoEdges) {
  QueryLog log{{sparql::parse_sparql("SELECT * WHERE { ?s <p> ?o }"), 3}};
  auto g = build_global_query_graph(log, 1);
  EXPECT_EQ(g.nodes.size(), 1u);
  EXPECT_TRUE(g.edges.empty());
}

TEST(GlobalQueryGraph, SelfJoinGivesSelfLoop) {
  QueryLog log{{sparql::parse_sparql("SELECT * WHERE { ?a <knows> ?b . ?b <knows> ?c }"), 2}};
  auto g = build_global_query_graph(log, 1);
  auto knows = anon(std::nullopt, rdf::Term::iri("knows"), std::nullopt);
  EXPECT_EQ(g.nodes.at(knows), 2u);
  EXPECT_EQ(g.weight(knows, knows), 2u);
}

namespace {

QueryLog random_log(std::mt19937_64& rng) {
  static const char* props[] = {"<p1>", "<p2>", "<p3>"};
  static const char* consts[] = {"<a>", "<b>", "<c>", "\"x\""};
  static const char* vars[] = {"?u", "?v", "?w"};
  QueryLog log;
  std::size_t queries = 1 + rng() % 6;
  for (std::size_t q = 0; q < queries; ++q) {
    std::string body;
    std::size_t patterns = 1 + rng() % 4;
    for (std::size_t i = 0; i < patterns; ++i) {
      std::string s = rng() % 4 == 0 ? consts[rng() % 3] : vars[rng() % 3];
      std::string o = rng() % 3 == 0 ? consts[rng() % 4] : vars[rng() % 3];
      body += s + " " + props[rng() % 3] + " " + o + " . ";
    }
    log.push_back({sparql::parse_sparql("SELECT * WHERE { " + body + "}"), 1 + rng() % 3});
  }
  return log;
}

std::size_t omega_positions(const AnonPattern& p) {
  return !p.s + !p.p + !p.o;
}

}  // namespace

TEST(GlobalQueryGraph, EdgeWeightBoundedByCoOccurrence) {
  std::mt19937_64 rng(77);
  for (int round = 0; round < 100; ++round) {
    auto log = random_log(rng);
    auto g = build_global_query_graph(log, 2);
    auto normalized = normalize(log, 2);
    for (const auto& [edge, w] : g.edges) {
      EXPECT_GE(w, 1u);
      EXPECT_TRUE(g.nodes.contains(edge.first));
      EXPECT_TRUE(g.nodes.contains(edge.second));
      std::uint64_t both = 0;
      for (const auto& e : normalized) {
        std::set<AnonPattern> present;
        for (const auto& b : e.query.branches) {
          for (const auto& p : b.required) present.insert(anonymize(p));
        }
        if (present.contains(edge.first) && present.contains(edge.second)) both += e.multiplicity;
      }
      EXPECT_LE(w, both);
    }
  }
}

TEST(Normalize, RaisingThresholdNeverRemovesOmegas) {
  std::mt19937_64 rng(5);
  for (int round = 0; round < 100; ++round) {
    auto log = random_log(rng);
    for (std::uint64_t theta = 1; theta < 6; ++theta) {
      auto low = normalize(log, theta);
      auto high = normalize(log, theta + 1);
      for (std::size_t q = 0; q < log.size(); ++q) {
        const auto& a = low[q].query.branches[0].required;
        const auto& b = high[q].query.branches[0].required;
        for (std::size_t i = 0; i < a.size(); ++i) {
          EXPECT_LE(omega_positions(anonymize(a[i])), omega_positions(anonymize(b[i])));
        }
      }
    }
  }
}

TEST(Anonymize, IsIdempotent) {
  auto phi = normalize_and_anonymize(example_data().log, 2);
  for (const auto& [p, f] : phi) {
    sparql::TriplePattern back{
        p.s ? sparql::PatternTerm(*p.s) : sparql::PatternTerm(sparql::Variable{"x"}),
        p.p ? sparql::PatternTerm(*p.p) : sparql::PatternTerm(sparql::Variable{"y"}),
        p.o ? sparql::PatternTerm(*p.o) : sparql::PatternTerm(sparql::Variable{"z"})};
    EXPECT_EQ(anonymize(back), p);
  }
}
