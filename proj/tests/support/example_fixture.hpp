#pragma once

#include "partout/rdf/dictionary.hpp"
#include "partout/rdf/triple_store.hpp"
#include "partout/workload/analyzer.hpp"

namespace partout::testing {

struct ExampleData {
  rdf::Dictionary dict;
  rdf::TripleStore store;
  workload::QueryLog log;
};

/// The worked-example dataset and query log, loaded once per process.
const ExampleData& example_data();

rdf::Term db(const std::string& local);

}  // namespace partout::testing
