#include "support/fixtures.hpp"

#include <fmt/format.h>

#include "partout/bench/example.hpp"
#include "support/example_fixture.hpp"

namespace partout::testing {

const fragment::Fragmentation& example_fragmentation() {
  static const fragment::Fragmentation f = [] {
    fragment::PartitionOptions options;
    options.theta = 2;
    options.sample_fraction = 1.0;
    const auto& d = example_data();
    return fragment::partition(d.store, d.dict, d.log, options);
  }();
  return f;
}

const alloc::Catalog& example_catalog() {
  static const alloc::Catalog c = [] {
    const auto& d = example_data();
    const auto& frag = example_fragmentation();
    alloc::Allocation a;
    a.host_count = 3;
    a.fragment_host = {{1, 0}, {8, 0}, {2, 1}, {3, 2}, {4, 2}, {5, 2}, {6, 2}, {7, 2}};
    auto graph = alloc::build_fragment_graph(workload::build_global_query_graph(d.log, 2), frag);
    auto catalog = alloc::make_catalog(frag, graph, a, {});
    alloc::compute_stats(catalog, d.store, d.dict);
    return catalog;
  }();
  return c;
}

std::vector<alloc::FragmentLoad> table2_loads() {
  return {{1, 2000, 22000, false}, {2, 4499, 9998, false}, {3, 3000, 9000, false},
          {4, 3000, 3000, false},  {5, 2000, 2000, false}, {6, 1700, 1700, false},
          {7, 300, 900, false},    {8, 1, 10, false},      {9, 3000, 0, true}};
}

alloc::FragmentGraph allocation_fixture_graph() {
  alloc::FragmentGraph g;
  g.set(1, 8, 10);
  g.set(2, 1, 0);
  g.set(2, 8, 0);
  g.set(3, 7, 2);
  g.set(3, 2, 2);
  g.set(7, 2, 2);
  g.set(3, 6, 1);
  g.set(6, 4, 1);
  g.set(5, 7, 1);
  g.set(5, 2, 1);
  return g;
}

alloc::FragmentGraph corrected_fixture_graph() {
  auto g = allocation_fixture_graph();
  g.set(3, 2, 0);
  g.set(5, 2, 0);
  return g;
}

const Figure4Fixture& figure4_fixture() {
  static const Figure4Fixture fx = [] {
    Figure4Fixture f;
    auto type = rdf::Term::iri(std::string(rdf::kRdfType));
    auto city = db("city");
    auto located = db("located");
    auto germany = db("Germany");
    auto name = db("name");
    auto add = [&](const rdf::Term& s, const rdf::Term& p, const rdf::Term& o) {
      f.store.insert({f.dict.intern(s), f.dict.intern(p), f.dict.intern(o)});
    };
    for (int i = 1; i <= 3000; ++i) {
      auto c = db(fmt::format("city{}", i));
      add(c, type, city);
      if (i <= 300) add(c, located, germany);
      if (i > 100 && i <= 300) add(c, name, rdf::Term::plain_literal(fmt::format("City {}", i)));
    }
    using fragment::SimplePredicate;
    std::vector<SimplePredicate> preds{
        SimplePredicate::compare(rdf::Component::Property, rdf::CompareOp::Equal, located),
        SimplePredicate::compare(rdf::Component::Property, rdf::CompareOp::Equal, name),
        SimplePredicate::compare(rdf::Component::Object, rdf::CompareOp::Equal, germany)};
    std::vector<fragment::Fragment> fragments{
        {1, 0b101, false, 3, 300}, {2, 0b010, false, 3, 200}, {3, 0, true, 0, 3000}};
    fragment::Fragmentation frag(preds, fragments);
    alloc::Allocation a;
    a.host_count = 3;
    a.fragment_host = {{1, 0}, {2, 1}};
    f.catalog = alloc::make_catalog(frag, {}, a, {});
    alloc::compute_stats(f.catalog, f.store, f.dict);
    f.query = sparql::parse_sparql(bench::example_city_query());
    return f;
  }();
  return fx;
}

}  // namespace partout::testing
