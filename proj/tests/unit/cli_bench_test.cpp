#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "partout/bench/driver.hpp"
#include "partout/bench/example.hpp"
#include "partout/bench/generator.hpp"
#include "partout/error.hpp"
#include "partout/fragment/fragmentation.hpp"
#include "partout/rdf/ntriples.hpp"
#include "support/example_fixture.hpp"
#include "support/oracle.hpp"

using namespace partout;
using namespace partout::bench;
namespace fx = partout::testing;
namespace fs = std::filesystem;

namespace {

struct Synthetic {
  rdf::Dictionary dict;
  rdf::TripleStore store;
  std::uint64_t written = 0;
};

const Synthetic& synthetic_20k() {
  static const Synthetic s = [] {
    Synthetic out;
    std::stringstream nt;
    out.written = write_synthetic_dataset(nt, 20000, 5);
    for (const auto& t : rdf::parse_ntriples(nt, out.dict)) out.store.insert(t);
    return out;
  }();
  return s;
}

std::size_t pattern_count(const sparql::Query& q) {
  std::size_t n = 0;
  for (const auto& b : q.branches) n += b.required.size() + b.optional.size();
  return n;
}

int run_cli(const std::string& args) {
  auto status = std::system((std::string(PARTOUT_CLI) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(SyntheticData, ReachesTargetAndIsDeterministic) {
  const auto& s = synthetic_20k();
  EXPECT_GE(s.written, 20000u);
  EXPECT_EQ(s.store.size(), s.written);
  std::stringstream a, b, c;
  write_synthetic_dataset(a, 3000, 9);
  write_synthetic_dataset(b, 3000, 9);
  write_synthetic_dataset(c, 3000, 10);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_NE(a.str(), c.str());
}

TEST(Generator, EveryQueryHasResults) {
  const auto& s = synthetic_20k();
  auto set = generate_queries(s.store, s.dict, {60, 6, 4, 7});
  ASSERT_EQ(set.queries.size(), 60u);
  std::set<Shape> shapes;
  for (const auto& g : set.queries) {
    shapes.insert(g.shape);
    auto n = pattern_count(g.query);
    EXPECT_GE(n, 1u);
    EXPECT_LE(n, g.shape == Shape::Star ? 6u : 4u);
    EXPECT_FALSE(fx::evaluate_centralized(g.query, s.store, s.dict).empty()) << g.text;
    EXPECT_EQ(sparql::parse_sparql(g.text), g.query);
  }
  EXPECT_EQ(shapes.size(), 2u);
}

TEST(Generator, SameSeedSameQueries) {
  const auto& s = synthetic_20k();
  auto a = generate_queries(s.store, s.dict, {20, 6, 4, 3});
  auto b = generate_queries(s.store, s.dict, {20, 6, 4, 3});
  auto c = generate_queries(s.store, s.dict, {20, 6, 4, 4});
  ASSERT_EQ(a.queries.size(), b.queries.size());
  for (std::size_t i = 0; i < a.queries.size(); ++i) EXPECT_EQ(a.queries[i].text, b.queries[i].text);
  std::vector<std::string> ta, tc;
  for (const auto& q : a.queries) ta.push_back(q.text);
  for (const auto& q : c.queries) tc.push_back(q.text);
  EXPECT_NE(ta, tc);
}

TEST(Generator, SinglePatternMaxima) {
  const auto& s = synthetic_20k();
  auto set = generate_queries(s.store, s.dict, {30, 1, 1, 2});
  ASSERT_EQ(set.queries.size(), 30u);
  for (const auto& g : set.queries) EXPECT_EQ(pattern_count(g.query), 1u);
}

TEST(Generator, SkipsShapesTheDataCannotSupply) {
  rdf::Dictionary dict;
  rdf::TripleStore store;
  store.insert({dict.intern(fx::db("a")), dict.intern(fx::db("p")), dict.intern(rdf::Term::plain_literal("x"))});
  auto set = generate_queries(store, dict, {10, 6, 4, 1});
  for (const auto& g : set.queries) EXPECT_EQ(pattern_count(g.query), 1u);
  EXPECT_FALSE(set.notices.empty());
  EXPECT_THROW(generate_queries(rdf::TripleStore{}, dict, {1, 1, 1, 1}), Error);
  EXPECT_THROW(generate_queries(store, dict, {1, 0, 1, 1}), Error);
}

TEST(ByProperty, OneFragmentPerQueriedProperty) {
  const auto& d = fx::example_data();
  fragment::PartitionOptions opt;
  opt.sample_fraction = 1.0;
  auto frag = fragment::by_property_fragmentation(d.store, d.dict, d.log, opt);
  std::set<std::string> props;
  std::uint64_t total = 0;
  for (const auto& f : frag.fragments()) {
    total += f.size;
    if (!f.remainder) props.insert(frag.minterm_text(f));
  }
  EXPECT_EQ(frag.fragments().size(), 6u);
  EXPECT_EQ(total, d.store.size());
  for (const auto* p : {"http://www.w3.org/1999/02/22-rdf-syntax-ns#type", "http://example.org/db/located",
                        "http://example.org/db/population", "http://example.org/db/revenue",
                        "http://example.org/db/name"}) {
    bool found = false;
    for (const auto& text : props) found = found || text.find(fmt::format("prop=<{}>", p)) != std::string::npos;
    EXPECT_TRUE(found) << p;
  }
  EXPECT_TRUE(fragment::by_property_fragmentation(d.store, d.dict, {}, opt).fragments().size() == 1);
}

TEST(Bench, OneRowPerQueryRunAndSession) {
  std::vector<sparql::Query> queries{sparql::parse_sparql("SELECT * WHERE { ?s ?p ?o }")};
  BenchConfig cfg;
  cfg.repetitions = 3;
  cfg.interval = std::chrono::milliseconds(5);
  int calls = 0;
  auto rows = run_bench(queries, cfg, [&](const sparql::Query&) {
    ++calls;
    return Measurement{7, 0};
  });
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(calls, 3);
  for (std::uint32_t i = 0; i < 3; ++i) {
    EXPECT_EQ(rows[i].run, i);
    EXPECT_EQ(rows[i].measurement.rows, 7u);
  }
  cfg.concurrency = 4;
  cfg.repetitions = 2;
  std::vector<sparql::Query> two(2, queries[0]);
  EXPECT_EQ(run_bench(two, cfg, [](const sparql::Query&) { return Measurement{}; }).size(), 16u);
}

TEST(Bench, CsvRecordsTimeoutsAndFailures) {
  std::vector<sparql::Query> queries(3, sparql::parse_sparql("SELECT * WHERE { ?s ?p ?o }"));
  BenchConfig cfg;
  cfg.timeout = std::chrono::milliseconds(50);
  int call = 0;
  auto rows = run_bench(queries, cfg, [&](const sparql::Query&) {
    int me = call++;
    if (me == 1) std::this_thread::sleep_for(std::chrono::milliseconds(300));
    if (me == 2) throw ClusterError("boom");
    return Measurement{2, 5};
  });
  std::ostringstream csv;
  write_bench_csv(csv, rows);
  std::istringstream lines(csv.str());
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "query_id,run,concurrency,response_ms,rows,remote_pages");
  std::getline(lines, line);
  EXPECT_TRUE(line.starts_with("0,0,1,")) << line;
  EXPECT_TRUE(line.ends_with(",2,5")) << line;
  std::getline(lines, line);
  EXPECT_EQ(line, "1,0,1,timeout,,");
  std::getline(lines, line);
  EXPECT_EQ(line, "2,0,1,error,,");
  cfg.concurrency = 0;
  EXPECT_THROW(run_bench(queries, cfg, [](const sparql::Query&) { return Measurement{}; }), Error);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run_cli(""), 2);
  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_EQ(run_cli("partition --no-such-flag"), 2);
  EXPECT_EQ(run_cli("query --sparql 'SELECT * WHERE { ?s ?p ?o }'"), 2);
  EXPECT_EQ(run_cli("partition --data /nonexistent.nt --log /nonexistent.log --out /tmp/x.json"), 3);
}

TEST(Cli, WorkedExamplePipeline) {
  auto dir = fs::temp_directory_path() / "partout_cli_test";
  fs::create_directories(dir);
  auto p = [&](const char* name) { return (dir / name).string(); };
  ASSERT_EQ(run_cli(fmt::format("gen-example --out {} --query-log {}", p("ex.nt"), p("ex.log"))), 0);
  ASSERT_EQ(run_cli(fmt::format("partition --data {} --log {} --sample 1.0 --out {}", p("ex.nt"), p("ex.log"),
                                p("frag.json"))),
            0);
  ASSERT_EQ(run_cli(fmt::format("allocate --fragmentation {} --data {} --hosts 3 --out {}", p("frag.json"),
                                p("ex.nt"), p("cat.json"))),
            0);
  {
    std::ofstream q(p("city.rq"));
    q << example_city_query();
  }
  auto cmd = fmt::format("{} query --in-process --catalog {} --data {} --file {} > {} 2>/dev/null", PARTOUT_CLI,
                         p("cat.json"), p("ex.nt"), p("city.rq"), p("out.tsv"));
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  std::ifstream out(p("out.tsv"));
  std::string header;
  std::getline(out, header);
  EXPECT_EQ(header, "?name");
  std::size_t rows = 0;
  for (std::string line; std::getline(out, line);) ++rows;
  EXPECT_EQ(rows, 300u);
}
