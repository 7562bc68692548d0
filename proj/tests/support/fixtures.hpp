#pragma once

#include <vector>

#include "partout/alloc/allocation.hpp"
#include "partout/alloc/catalog.hpp"
#include "partout/fragment/fragmentation.hpp"
#include "partout/rdf/dictionary.hpp"
#include "partout/rdf/triple_store.hpp"
#include "partout/sparql/query.hpp"

namespace partout::testing {

/// Worked-example fragmentation (Θ=2, full sample).
const fragment::Fragmentation& example_fragmentation();

/// Example fragmentation under the published allocation
/// host0={1,8}, host1={2}, host2={3,4,5,6,7}, with statistics.
const alloc::Catalog& example_catalog();

/// Fragment rows as printed in the worked example's table (Load column verbatim).
std::vector<alloc::FragmentLoad> table2_loads();

/// Fragment graph listed with the allocation example.
alloc::FragmentGraph allocation_fixture_graph();

/// Same graph with w(3,2) and w(5,2) set to 0.
alloc::FragmentGraph corrected_fixture_graph();

/// Three-host catalog for the three-pattern city query: 300 located-Germany
/// triples form fragment 1 on host 0, 200 name triples fragment 2 on host 1,
/// 3000 city-type triples only in the remainder.
struct Figure4Fixture {
  rdf::Dictionary dict;
  rdf::TripleStore store;
  alloc::Catalog catalog;
  sparql::Query query;
};

const Figure4Fixture& figure4_fixture();

}  // namespace partout::testing
