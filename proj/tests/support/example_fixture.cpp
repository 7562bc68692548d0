#include "support/example_fixture.hpp"

#include <sstream>

#include "partout/bench/example.hpp"
#include "partout/rdf/ntriples.hpp"

namespace partout::testing {

const ExampleData& example_data() {
  static const ExampleData data = [] {
    ExampleData d;
    std::stringstream nt;
    bench::write_example_dataset(nt);
    for (const auto& t : rdf::parse_ntriples(nt, d.dict)) d.store.insert(t);
    std::istringstream log(bench::example_query_log());
    d.log = sparql::parse_query_log(log);
    return d;
  }();
  return data;
}

rdf::Term db(const std::string& local) { return rdf::Term::iri(std::string(bench::kDb) + local); }

}  // namespace partout::testing
