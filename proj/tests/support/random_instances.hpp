#pragma once

#include <random>

#include "partout/fragment/fragmentation.hpp"
#include "partout/rdf/dictionary.hpp"
#include "partout/rdf/triple_store.hpp"
#include "partout/workload/analyzer.hpp"

namespace partout::testing {

struct Instance {
  rdf::Dictionary dict;
  rdf::TripleStore store;
  workload::QueryLog log;
};

/// Small random store (up to `max_triples`) with a random workload drawn
/// from a bounded pool of constants, comparisons, and type tests.
Instance random_instance(std::mt19937_64& rng, std::size_t max_triples);

struct FragmentationCheck {
  bool disjoint = true;
  bool complete = true;
  bool routing_agrees = true;
};

/// Brute-force evaluation of every minterm on every triple.
FragmentationCheck check_fragmentation(const fragment::Fragmentation& frag,
                                       const rdf::TripleStore& store, const rdf::Dictionary& dict);

}  // namespace partout::testing
