#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "partout/alloc/allocation.hpp"
#include "partout/alloc/catalog.hpp"
#include "partout/alloc/host_sweep.hpp"
#include "partout/fragment/fragmentation.hpp"
#include "partout/plan/plan.hpp"
#include "partout/error.hpp"
#include "support/example_fixture.hpp"
#include "support/fixtures.hpp"

using namespace partout;
using namespace partout::alloc;
namespace fx = partout::testing;
using partout::testing::db;
using partout::testing::example_data;

namespace {

constexpr std::uint64_t kAmple = 1'000'000'000;

std::vector<std::uint64_t> ample(std::size_t n) { return std::vector<std::uint64_t>(n, kAmple); }

std::vector<std::vector<std::uint32_t>> by_host(const Allocation& a) {
  std::vector<std::vector<std::uint32_t>> out(a.host_count);
  for (const auto& [f, h] : a.fragment_host) out[h].push_back(f);
  return out;
}

// Straight transcription of the greedy with the benefit function evaluated from scratch
// for every candidate.
std::map<std::uint32_t, std::uint32_t> greedy_oracle(const std::vector<FragmentLoad>& frags,
                                                     const std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t>& w,
                                                     std::size_t n) {
  double L = 0;
  for (const auto& f : frags) L += static_cast<double>(f.load);
  double U = L / static_cast<double>(n);
  auto weight = [&](std::uint32_t a, std::uint32_t b) -> double {
    auto it = w.find({std::min(a, b), std::max(a, b)});
    return it == w.end() ? 0.0 : static_cast<double>(it->second);
  };
  std::vector<const FragmentLoad*> order;
  for (const auto& f : frags) {
    if (!f.remainder) order.push_back(&f);
  }
  std::sort(order.begin(), order.end(), [](auto* a, auto* b) {
    return a->load != b->load ? a->load > b->load : a->id < b->id;
  });
  std::map<std::uint32_t, std::uint32_t> placed;
  for (const auto* f : order) {
    double best = -1;
    std::uint32_t best_h = 0;
    for (std::uint32_t h = 0; h < n; ++h) {
      double cl = 0, a = 0;
      bool empty = true;
      for (const auto& [g, gh] : placed) {
        if (gh != h) continue;
        empty = false;
        for (const auto& x : frags) {
          if (x.id == g) cl += static_cast<double>(x.load);
        }
        a += weight(f->id, g) + 1;
      }
      double b = 2 * U / (U + cl) * (empty ? 1.0 : a);
      if (b > best) {
        best = b;
        best_h = h;
      }
    }
    placed[f->id] = best_h;
  }
  return placed;
}

}  // namespace

TEST(Benefit, WorkedExampleValues) {
  auto frags = fx::table2_loads();
  double U = uniform_load(frags, 3);
  EXPECT_NEAR(U, 48608.0 / 3.0, 1e-9);
  EXPECT_NEAR(U, 16202.67, 0.01);
  HostState empty{0, kAmple, {}, 0, 0};
  EXPECT_EQ(benefit(2, empty, U, fx::allocation_fixture_graph()), 2.0);
  HostState with_one{1, kAmple, {1}, 22000, 0};
  double b = benefit(2, with_one, U, fx::allocation_fixture_graph());
  EXPECT_NEAR(b, 2 * U / (U + 22000), 1e-12);
  EXPECT_NEAR(b, 0.8482, 0.0005);
}

TEST(Benefit, SumsWeightPlusOnePerResident) {
  FragmentGraph g;
  g.set(1, 2, 3);
  HostState h{0, kAmple, {2, 3}, 100, 0};
  EXPECT_DOUBLE_EQ(benefit(1, h, 100, g), 2.0 * 100 / 200 * ((3 + 1) + (0 + 1)));
}

TEST(Allocate, FixtureGraphAsListed) {
  // The benefit function on the listed weights puts fragment 3 next to fragment 2 (3.71 > 2.0).
  auto a = allocate(fx::table2_loads(), fx::allocation_fixture_graph(), ample(3));
  auto hosts = by_host(a);
  EXPECT_EQ(hosts[0], (std::vector<std::uint32_t>{1, 8}));
  EXPECT_EQ(hosts[1], (std::vector<std::uint32_t>{2, 3, 5, 6, 7}));
  EXPECT_EQ(hosts[2], (std::vector<std::uint32_t>{4}));
}

TEST(Allocate, CorrectedFixtureGivesPublishedOutcome) {
  auto a = allocate(fx::table2_loads(), fx::corrected_fixture_graph(), ample(3));
  auto hosts = by_host(a);
  EXPECT_EQ(hosts[0], (std::vector<std::uint32_t>{1, 8}));
  EXPECT_EQ(hosts[1], (std::vector<std::uint32_t>{2}));
  EXPECT_EQ(hosts[2], (std::vector<std::uint32_t>{3, 4, 5, 6, 7}));
  EXPECT_FALSE(a.fragment_host.contains(9));
}

TEST(Allocate, SingleHostTakesEverything) {
  auto a = allocate(fx::table2_loads(), {}, ample(1));
  EXPECT_EQ(a.fragment_host.size(), 8u);
  for (const auto& [f, h] : a.fragment_host) EXPECT_EQ(h, 0u);
}

TEST(Allocate, FullHostFallsBackToNextBest) {
  std::vector<FragmentLoad> frags{{1, 10, 100, false}, {2, 10, 90, false}, {3, 1, 0, true}};
  FragmentGraph g;
  g.set(1, 2, 50);
  // host 0 holds exactly one fragment of 10 triples at 100 bytes each
  auto a = allocate(frags, g, {1000, 1000});
  EXPECT_EQ(a.fragment_host.at(1), 0u);
  EXPECT_EQ(a.fragment_host.at(2), 1u);
  for (const auto& h : a.hosts) EXPECT_LE(h.used_bytes, h.capacity);
}

TEST(Allocate, InfeasibleReportsFragmentAndDeficit) {
  std::vector<FragmentLoad> frags{{1, 10, 100, false}, {2, 1, 0, true}};
  try {
    allocate(frags, {}, {500, 700});
    FAIL() << "expected AllocationError";
  } catch (const AllocationError& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("fragment 1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("deficit 300"), std::string::npos) << msg;
  }
}

TEST(Allocate, AgreesWithOracleAndIsDeterministic) {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 200; ++round) {
    std::size_t nf = 1 + rng() % 8, n = 1 + rng() % 4;
    std::vector<FragmentLoad> frags;
    for (std::uint32_t i = 1; i <= nf; ++i) {
      std::uint64_t size = 1 + rng() % 50;
      frags.push_back({i, size, size * (rng() % 5), false});
    }
    frags.push_back({static_cast<std::uint32_t>(nf + 1), 10, 0, true});
    FragmentGraph g;
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> w;
    for (std::uint32_t a = 1; a <= nf; ++a) {
      for (std::uint32_t b = a; b <= nf; ++b) {
        if (rng() % 3 == 0) {
          auto x = 1 + rng() % 5;
          g.set(a, b, x);
          w[{a, b}] = x;
        }
      }
    }
    auto got = allocate(frags, g, ample(n));
    EXPECT_EQ(got.fragment_host, greedy_oracle(frags, w, n));
    EXPECT_EQ(got, allocate(frags, g, ample(n)));
  }
}

TEST(Allocate, ZeroWeightsStillFavourOccupiedHosts) {
  // A = Σ(0 + 1) = |F_h| rewards hosts that already hold fragments, so the
  // load-balance bound only holds without the affinity factor.
  std::mt19937_64 rng(3);
  int violations = 0;
  for (int round = 0; round < 300; ++round) {
    std::size_t nf = 1 + rng() % 8, n = 1 + rng() % 3;
    std::vector<FragmentLoad> frags;
    std::uint64_t max_load = 0;
    for (std::uint32_t i = 1; i <= nf; ++i) {
      std::uint64_t load = rng() % 1000;
      max_load = std::max(max_load, load);
      frags.push_back({i, 1, load, false});
    }
    frags.push_back({static_cast<std::uint32_t>(nf + 1), 1, 0, true});
    auto a = allocate(frags, {}, ample(n));
    std::uint64_t lo = UINT64_MAX, hi = 0;
    for (const auto& h : a.hosts) {
      lo = std::min(lo, h.current_load);
      hi = std::max(hi, h.current_load);
    }
    violations += hi - lo > max_load;
  }
  EXPECT_GT(violations, 0);
}

TEST(Allocate, WithoutAffinityBalancesLoad) {
  AllocationOptions opts;
  opts.affinity = false;
  std::mt19937_64 rng(3);
  for (int round = 0; round < 300; ++round) {
    std::size_t nf = 1 + rng() % 8, n = 1 + rng() % 3;
    std::vector<FragmentLoad> frags;
    std::uint64_t max_load = 0;
    for (std::uint32_t i = 1; i <= nf; ++i) {
      std::uint64_t load = rng() % 1000;
      max_load = std::max(max_load, load);
      frags.push_back({i, 1, load, false});
    }
    frags.push_back({static_cast<std::uint32_t>(nf + 1), 1, 0, true});
    auto a = allocate(frags, {}, ample(n), opts);
    std::uint64_t lo = UINT64_MAX, hi = 0;
    for (const auto& h : a.hosts) {
      lo = std::min(lo, h.current_load);
      hi = std::max(hi, h.current_load);
    }
    EXPECT_LE(hi - lo, max_load);
  }
}

TEST(RemainderHash, Fnv1aReferenceValues) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

TEST(RemainderHash, SubjectKeyedAndBalanced) {
  EXPECT_EQ(remainder_host("http://x/anything", 1), 0u);
  const auto& d = example_data();
  const auto& cat = fx::example_catalog();
  for (const auto& t : d.store.triples()) {
    if (cat.fragmentation.fragment_of(t, d.dict) != cat.fragmentation.remainder_id()) continue;
    EXPECT_EQ(cat.route(t, d.dict), remainder_host(d.dict.term(t.s).lexical, 3));
    EXPECT_EQ(cat.route(t, d.dict), cat.route({t.s, t.p, t.s}, d.dict));
  }

  std::vector<int> counts(3);
  for (int i = 0; i < 10000; ++i) ++counts[remainder_host(fmt::format("http://example.org/s{}", i), 3)];
  for (int c : counts) EXPECT_NEAR(c, 10000 / 3.0, 10000 / 3.0 * 0.1);
}

TEST(FragmentGraph, WorkedExample) {
  const auto& d = example_data();
  auto g = build_fragment_graph(workload::build_global_query_graph(d.log, 2), fx::example_fragmentation());
  EXPECT_GE(g.weight(8, 1), 10u);
  for (const auto& [k, w] : g.edges()) {
    EXPECT_GE(w, 1u);
    EXPECT_NE(k.first, 9u);  // the remainder overlaps no pattern
    EXPECT_NE(k.second, 9u);
  }
}

TEST(FragmentGraph, OneQueryTwoFragments) {
  rdf::Dictionary dict;
  rdf::TripleStore store;
  const char* props[] = {"p", "q", "r"};
  for (int i = 0; i < 6; ++i) {
    rdf::Triple t;
    t.s = dict.intern(rdf::Term::iri(fmt::format("s{}", i)));
    t.p = dict.intern(rdf::Term::iri(props[i % 3]));
    t.o = dict.intern(rdf::Term::iri("o"));
    store.insert(t);
  }
  workload::QueryLog log{{sparql::parse_sparql("SELECT * WHERE { ?a <p> ?b . ?a <q> ?c }"), 7}};
  fragment::PartitionOptions opt;
  opt.theta = 1;
  opt.sample_fraction = 1.0;
  auto frag = fragment::partition(store, dict, log, opt);
  ASSERT_EQ(frag.fragments().size(), 3u);
  auto g = build_fragment_graph(workload::build_global_query_graph(log, 1), frag);
  ASSERT_EQ(g.edges().size(), 1u);
  EXPECT_EQ(g.weight(1, 2), 7u);
}

TEST(Catalog, RoutingMatchesFragmentHosts) {
  const auto& d = example_data();
  const auto& cat = fx::example_catalog();
  std::uint64_t on_host0 = 0;
  for (const auto& t : d.store.triples()) {
    auto f = cat.fragmentation.fragment_of(t, d.dict);
    auto h = cat.route(t, d.dict);
    if (f != cat.fragmentation.remainder_id()) EXPECT_EQ(h, cat.allocation.at(f));
    if (h == 0 && f != cat.fragmentation.remainder_id()) ++on_host0;
  }
  EXPECT_EQ(on_host0, 2001u);
  EXPECT_EQ(cat.stats_of(1).triples, 2000u);
  EXPECT_EQ(cat.stats_of(3).property_counts.size(), 1u);
}

TEST(Catalog, RoundTrips) {
  auto dir = std::filesystem::temp_directory_path() / "partout_catalog_test";
  std::filesystem::create_directories(dir);

  Catalog empty;
  save_catalog(empty, dir / "empty.json");
  EXPECT_EQ(load_catalog(dir / "empty.json"), empty);

  auto cat = fx::example_catalog();
  cat.hosts = {{0, "127.0.0.1:7001", 5000000}, {1, "127.0.0.1:7002", 5000000}, {2, "127.0.0.1:7003", 5000000}};
  cat.dictionary_path = "dict.tsv";
  cat.cost_model.t_page = 123.5;
  cat.remainder_strays[4] = 17;
  save_catalog(cat, dir / "cat.json");
  auto back = load_catalog(dir / "cat.json");
  EXPECT_EQ(back, cat);
  save_catalog(back, dir / "cat2.json");
  std::ifstream a(dir / "cat.json"), b(dir / "cat2.json");
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  EXPECT_EQ(sa.str(), sb.str());
}

TEST(Catalog, RejectsUnknownVersionAndCorruptFiles) {
  auto dir = std::filesystem::temp_directory_path() / "partout_catalog_test";
  std::filesystem::create_directories(dir);
  auto j = to_json(Catalog{});
  j["version"] = 99;
  std::ofstream(dir / "v99.json") << j.dump();
  EXPECT_THROW(load_catalog(dir / "v99.json"), FormatError);
  std::ofstream(dir / "bad.json") << "{\"version\": 1, \"cost_model\": ";
  EXPECT_THROW(load_catalog(dir / "bad.json"), FormatError);
  std::ofstream(dir / "missing.json") << "{\"version\": 1}";
  EXPECT_THROW(load_catalog(dir / "missing.json"), FormatError);
}

TEST(Catalog, FragmentationFileRoundTrips) {
  auto dir = std::filesystem::temp_directory_path() / "partout_catalog_test";
  std::filesystem::create_directories(dir);
  FragmentationFile f{fx::example_fragmentation(), fx::allocation_fixture_graph(), 2};
  save_fragmentation(f, dir / "frag.json");
  EXPECT_EQ(load_fragmentation(dir / "frag.json"), f);
}

TEST(Stats, TopPropertyObjectsAreCapped) {
  StatsBuilder b;
  for (rdf::TermId o = 1; o <= 1500; ++o) {
    for (rdf::TermId k = 0; k < (o <= 10 ? 3 : 1); ++k) b.add(1, {10000 + o * 10 + k, 5, o});
  }
  auto s = b.finish().at(1);
  EXPECT_EQ(s.po_counts.size(), kTopPropertyObjects);
  EXPECT_TRUE(s.po_truncated);
  EXPECT_EQ(s.po_counts.at({5, 1}), 3u);
  EXPECT_EQ(s.property_counts.at(5), 1520u);
  EXPECT_EQ(s.property_objects.at(5), 1500u);
}

namespace {

struct SweepInput {
  rdf::Dictionary dict;
  workload::QueryLog log;
  Catalog base;
};

/// Properties p, q and an unqueried filler r, 1000 triples each; p and q are queried separately.
SweepInput two_property_input(double c_host_scan) {
  SweepInput in;
  rdf::TripleStore store;
  for (int i = 0; i < 1000; ++i) {
    for (const char* p : {"p", "q", "r"}) {
      store.insert({in.dict.intern(db(fmt::format("s{}", i))), in.dict.intern(db(p)),
                    in.dict.intern(db(fmt::format("o{}", i)))});
    }
  }
  std::istringstream log(
      "SELECT * WHERE { ?s <http://example.org/db/p> ?o }\n###\n"
      "SELECT * WHERE { ?s <http://example.org/db/q> ?o }\n");
  in.log = sparql::parse_query_log(log);
  fragment::PartitionOptions opt;
  opt.theta = 1;
  opt.sample_fraction = 1.0;
  auto frag = fragment::partition(store, in.dict, in.log, opt);
  auto graph = build_fragment_graph(workload::build_global_query_graph(in.log, 1), frag);
  Allocation one;
  one.host_count = 1;
  plan::CostModel model;
  model.c_host_scan = c_host_scan;
  in.base = make_catalog(frag, graph, one, {}, model);
  compute_stats(in.base, store, in.dict);
  return in;
}

}  // namespace

TEST(HostSweep, SingleCandidateIsReturned) {
  auto in = two_property_input(1);
  auto sweep = optimal_host_count(in.base, in.dict, in.log, 1, 1);
  EXPECT_EQ(sweep.best, 1u);
  ASSERT_EQ(sweep.points.size(), 1u);
}

TEST(HostSweep, SplittingDisjointQueriesHalvesHostScans) {
  auto in = two_property_input(1);
  auto sweep = optimal_host_count(in.base, in.dict, in.log, 1, 2);
  ASSERT_EQ(sweep.points.size(), 2u);
  // Per query: scan 1000, project 1000, plus the stored triples of the scanning host.
  EXPECT_DOUBLE_EQ(sweep.points[0].cost, 2 * (1000 + 1000 + 3000));
  EXPECT_DOUBLE_EQ(sweep.points[1].cost, 2 * (1000 + 1000 + 1500));
  EXPECT_EQ(sweep.best, 2u);
}

TEST(HostSweep, BestIsArgminOfRecordedSweep) {
  const auto& d = example_data();
  auto sweep = optimal_host_count(fx::example_catalog(), d.dict, d.log, 1, 5, 0);
  ASSERT_EQ(sweep.points.size(), 5u);
  auto it = std::min_element(sweep.points.begin(), sweep.points.end(),
                             [](const SweepPoint& a, const SweepPoint& b) { return a.cost < b.cost; });
  EXPECT_EQ(sweep.best, it->hosts);
  auto again = optimal_host_count(fx::example_catalog(), d.dict, d.log, 1, 5, 0);
  EXPECT_EQ(again.best, sweep.best);
  EXPECT_THROW(optimal_host_count(fx::example_catalog(), d.dict, d.log, 3, 2), Error);
}
