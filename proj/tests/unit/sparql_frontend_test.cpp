#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "partout/error.hpp"
#include "partout/sparql/query.hpp"

using namespace partout;
using namespace partout::sparql;

namespace {

const std::string kPrefixes =
    "PREFIX db: <http://example.org/db/>\n";

rdf::Term db(const std::string& local) { return rdf::Term::iri("http://example.org/db/" + local); }

}  // namespace

TEST(ParseSparql, FigureFourQuery) {
  auto q = parse_sparql(kPrefixes +
                        "SELECT ?name WHERE { ?s rdf:type db:city . ?s db:located db:Germany . "
                        "?s db:name ?name . }");
  EXPECT_FALSE(q.select_all);
  EXPECT_EQ(q.projection, std::vector<std::string>{"name"});
  ASSERT_EQ(q.branches.size(), 1u);
  const auto& b = q.branches[0];
  ASSERT_EQ(b.required.size(), 3u);
  EXPECT_TRUE(b.optional.empty());
  EXPECT_TRUE(b.filters.empty());
  EXPECT_EQ(b.required[0].p, PatternTerm(rdf::Term::iri(std::string(rdf::kRdfType))));
  EXPECT_EQ(b.required[1].o, PatternTerm(db("Germany")));
  EXPECT_EQ(b.required[2].o, PatternTerm(Variable{"name"}));
}

TEST(ParseSparql, NumericFilter) {
  auto q = parse_sparql(kPrefixes +
                        "SELECT * WHERE { ?s db:name ?c . ?s db:revenue ?r . FILTER(?r >= 1000000000) }");
  ASSERT_EQ(q.branches[0].filters.size(), 1u);
  auto expected = Compare{"r", rdf::CompareOp::GreaterEq,
                          rdf::Term::typed_literal("1000000000", rdf::kXsdInteger)};
  EXPECT_EQ(q.branches[0].filters[0], FilterExpr(expected));
}

TEST(ParseSparql, SelectAllSinglePattern) {
  auto q = parse_sparql("SELECT * WHERE { ?s ?p ?o }");
  EXPECT_TRUE(q.select_all);
  ASSERT_EQ(q.branches.size(), 1u);
  ASSERT_EQ(q.branches[0].required.size(), 1u);
  EXPECT_TRUE(is_variable(q.branches[0].required[0].s));
  EXPECT_TRUE(is_variable(q.branches[0].required[0].p));
  EXPECT_TRUE(is_variable(q.branches[0].required[0].o));
}

TEST(ParseSparql, PredicateAndObjectLists) {
  auto q = parse_sparql(kPrefixes + "SELECT ?s WHERE { ?s a db:city ; db:name ?n , \"x\" . }");
  const auto& t = q.branches[0].required;
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t[1].s, t[0].s);
  EXPECT_EQ(t[2].p, t[1].p);
  EXPECT_EQ(t[2].o, PatternTerm(rdf::Term::plain_literal("x")));
}

TEST(ParseSparql, LiteralForms) {
  auto q = parse_sparql(
      "SELECT * WHERE { ?s <p> 'it\\'s \"q\"' . ?s <q> \"a\"@en . ?s <r> \"7\"^^xsd:int . "
      "?s <t> 2.5 . ?s <u> 1e3 . ?s <v> -4 }");
  const auto& t = q.branches[0].required;
  EXPECT_EQ(constant(t[0].o).lexical, "\"it's \\\"q\\\"\"");
  EXPECT_EQ(constant(t[1].o).lexical, "\"a\"@en");
  EXPECT_EQ(constant(t[2].o).lexical, "\"7\"^^<http://www.w3.org/2001/XMLSchema#int>");
  EXPECT_EQ(constant(t[3].o), rdf::Term::typed_literal("2.5", rdf::kXsdDecimal));
  EXPECT_EQ(constant(t[4].o), rdf::Term::typed_literal("1e3", rdf::kXsdDouble));
  EXPECT_EQ(constant(t[5].o), rdf::Term::typed_literal("-4", rdf::kXsdInteger));
}

TEST(ParseSparql, OptionalAndUnion) {
  auto q = parse_sparql(kPrefixes +
                        "SELECT ?s WHERE { ?s db:name ?n OPTIONAL { ?s db:located ?l FILTER(isIRI(?l)) } }");
  ASSERT_EQ(q.branches[0].optional.size(), 1u);
  ASSERT_EQ(q.branches[0].filters.size(), 1u);
  EXPECT_EQ(validate_executable(q), std::optional<std::string>("OPTIONAL execution"));

  auto u = parse_sparql(kPrefixes +
                        "SELECT ?s WHERE { { ?s a db:city } UNION { ?s a db:company } }");
  EXPECT_EQ(u.branches.size(), 2u);
  EXPECT_EQ(validate_executable(u), std::nullopt);
}

TEST(ParseSparql, ConstantOnLeftIsFlipped) {
  auto q = parse_sparql("SELECT * WHERE { ?s <p> ?v FILTER(10 < ?v && isLiteral(?v)) }");
  const auto& f = q.branches[0].filters;
  ASSERT_EQ(f.size(), 2u);
  EXPECT_EQ(std::get<Compare>(f[0]).op, rdf::CompareOp::Greater);
  EXPECT_TRUE(std::holds_alternative<IsLiteral>(f[1]));
}

TEST(ParseSparql, UnsupportedFeaturesFailLoudly) {
  const char* cases[] = {
      "SELECT DISTINCT ?s WHERE { ?s ?p ?o }",
      "SELECT ?s WHERE { ?s ?p ?o } LIMIT 10",
      "SELECT ?s WHERE { ?s ?p ?o } ORDER BY ?s",
      "SELECT ?s WHERE { ?s ?p ?o } OFFSET 3",
      "SELECT (COUNT(?s) AS ?c) WHERE { ?s ?p ?o }",
      "CONSTRUCT { ?s ?p ?o } WHERE { ?s ?p ?o }",
      "ASK { ?s ?p ?o }",
      "DESCRIBE <x>",
      "SELECT ?s WHERE { ?s <p>/<q> ?o }",
      "SELECT ?s WHERE { ?s <p>* ?o }",
      "SELECT ?s WHERE { ?s ?p ?o FILTER(regex(?o, \"x\")) }",
      "SELECT ?s WHERE { ?s ?p ?o FILTER(?o != 3) }",
      "SELECT ?s WHERE { ?s ?p ?o FILTER(?o < 3 || ?o > 5) }",
      "SELECT ?s WHERE { ?s ?p ?o { SELECT ?s WHERE { ?s ?p ?o } } }",
  };
  for (const char* text : cases) {
    EXPECT_THROW(parse_sparql(text), UnsupportedError) << text;
  }
}

TEST(ParseSparql, UnsupportedErrorNamesTokenSpan) {
  try {
    parse_sparql("SELECT ?s WHERE { ?s ?p ?o } LIMIT 10");
    FAIL();
  } catch (const UnsupportedError& e) {
    EXPECT_NE(std::string(e.what()).find("LIMIT at [29,34)"), std::string::npos) << e.what();
  }
}

TEST(ParseSparql, SyntaxErrors) {
  EXPECT_THROW(parse_sparql("SELECT ?s WHERE { ?s ?p }"), ParseError);
  EXPECT_THROW(parse_sparql("SELECT ?s WHERE { ?s ?p ?o "), ParseError);
  EXPECT_THROW(parse_sparql("SELECT ?s WHERE { \"x\" ?p ?o }"), ParseError);
  EXPECT_THROW(parse_sparql("SELECT ?s WHERE { ?s \"p\" ?o }"), ParseError);
  EXPECT_THROW(parse_sparql("SELECT ?s WHERE { ?s foo:bar ?o }"), ParseError);
  // filter variable absent from the patterns
  EXPECT_THROW(parse_sparql("SELECT ?s WHERE { ?s ?p ?o FILTER(?z > 1) }"), ParseError);
  // projected variable missing from one branch
  EXPECT_THROW(parse_sparql("SELECT ?x WHERE { { ?x <p> ?y } UNION { ?z <p> ?y } }"), ParseError);
}

TEST(ValidateExecutable, DisconnectedPatternsRejected) {
  auto q = parse_sparql("SELECT * WHERE { ?a <p> ?b . ?c <q> ?d }");
  EXPECT_TRUE(validate_executable(q).has_value());
  EXPECT_EQ(validate_executable(parse_sparql("SELECT * WHERE { ?a <p> ?b . ?b <q> ?d }")),
            std::nullopt);
}

TEST(QueryLog, MultiplicitiesAndSeparators) {
  std::istringstream in(
      "#x 2\nSELECT * WHERE { ?s <p> ?o }\n###\nSELECT * WHERE { ?s <q> ?o }\n###\n#x 10\n"
      "SELECT * WHERE { ?s <r> ?o }\n");
  auto log = parse_query_log(in);
  ASSERT_EQ(log.size(), 3u);
  EXPECT_EQ(log[0].multiplicity, 2u);
  EXPECT_EQ(log[1].multiplicity, 1u);
  EXPECT_EQ(log[2].multiplicity, 10u);
  std::ostringstream out;
  write_query_log(out, log);
  std::istringstream back(out.str());
  auto again = parse_query_log(back);
  ASSERT_EQ(again.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(again[i].query, log[i].query);
    EXPECT_EQ(again[i].multiplicity, log[i].multiplicity);
  }
}

TEST(QueryLog, ErrorLineIsAbsolute) {
  std::istringstream in("SELECT * WHERE { ?s <p> ?o }\n###\n\nSELECT * WHERE {\n ?s <p> }\n");
  try {
    parse_query_log(in);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 5u);
  }
}

namespace {

PatternTerm random_term(std::mt19937_64& rng, bool allow_literal, bool iri_only = false) {
  static const char* vars[] = {"a", "b", "c", "d"};
  static const char* iris[] = {"http://x/p", "http://x/q", "http://x/r", "urn:z"};
  switch (rng() % (iri_only ? 2 : 4)) {
    case 0: return Variable{vars[rng() % 4]};
    case 1: return rdf::Term::iri(iris[rng() % 4]);
    case 2:
      if (allow_literal) return rdf::Term::typed_literal(std::to_string(rng() % 100), rdf::kXsdInteger);
      return Variable{vars[rng() % 4]};
    default:
      if (allow_literal) return rdf::Term::plain_literal("v\\\"" + std::to_string(rng() % 7));
      return rdf::Term::iri(iris[rng() % 4]);
  }
}

GraphPattern random_branch(std::mt19937_64& rng, const std::vector<std::string>& must_have) {
  GraphPattern b;
  std::size_t n = 1 + rng() % 4;
  for (std::size_t i = 0; i < n; ++i) {
    b.required.push_back({random_term(rng, false), random_term(rng, false, true),
                          random_term(rng, true)});
  }
  for (const auto& v : must_have) b.required.push_back({Variable{v}, rdf::Term::iri("http://x/p"), Variable{"o"}});
  if (rng() % 3 == 0) {
    b.optional.push_back({Variable{"a"}, random_term(rng, false, true), random_term(rng, true)});
  }
  auto vars = variables(b);
  if (!vars.empty()) {
    const std::string& v = vars[rng() % vars.size()];
    switch (rng() % 3) {
      case 0:
        b.filters.push_back(Compare{v, static_cast<rdf::CompareOp>(rng() % 5),
                                    rdf::Term::typed_literal(std::to_string(rng() % 50), rdf::kXsdInteger)});
        break;
      case 1: b.filters.push_back(IsIri{v}); break;
      default: b.filters.push_back(IsLiteral{v}); break;
    }
  }
  return b;
}

}  // namespace

TEST(Render, RoundTripsRandomQueries) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 400; ++i) {
    Query q;
    q.select_all = rng() % 2 == 0;
    if (!q.select_all) q.projection = {"s"};
    std::size_t branches = 1 + rng() % 2;
    for (std::size_t b = 0; b < branches; ++b) q.branches.push_back(random_branch(rng, {"s"}));
    std::string text = render(q);
    Query back = parse_sparql(text);
    EXPECT_EQ(back, q) << text;
  }
}
