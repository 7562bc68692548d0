#include "partout/bench/example.hpp"

#include <ostream>

#include <fmt/format.h>

namespace partout::bench {

namespace {

constexpr std::string_view kPrefixes =
    "PREFIX rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#>\n"
    "PREFIX db: <http://example.org/db/>\n";

constexpr std::string_view kType = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
constexpr std::string_view kInteger = "http://www.w3.org/2001/XMLSchema#integer";

}  // namespace

std::string example_query_log() {
  std::string p(kPrefixes);
  return "#x 2\n" + p +
         "SELECT ?n WHERE { ?s rdf:type db:city . ?s db:located db:Germany . ?s db:name ?n . }\n"
         "###\n" + p +
         "SELECT ?p WHERE { ?s rdf:type db:city . ?s db:located db:USA . ?s db:population ?p . }\n"
         "###\n" + p +
         "SELECT ?s WHERE { ?s rdf:type db:company . ?s db:located db:Germany . }\n"
         "###\n" + p +
         "SELECT ?c WHERE { ?s db:name ?c . ?s db:revenue ?r . FILTER(?r >= 1000000000) }\n"
         "###\n#x 10\n" + p +
         "SELECT ?r WHERE { ?s db:name \"Apple\" . ?s db:revenue ?r . }\n";
}

std::string example_city_query() {
  return std::string(kPrefixes) +
         "SELECT ?name WHERE {\n  ?s rdf:type db:city .\n  ?s db:located db:Germany .\n"
         "  ?s db:name ?name . }\n";
}

void write_example_dataset(std::ostream& out) {
  auto iri = [](std::string_view local) { return fmt::format("<{}{}>", kDb, local); };
  auto integer = [](std::uint64_t v) { return fmt::format("\"{}\"^^<{}>", v, kInteger); };
  const std::string type = fmt::format("<{}>", kType);
  static constexpr std::string_view kElsewhere[] = {"France", "Italy", "Spain", "Poland", "USA"};

  for (int i = 1; i <= 3000; ++i) {
    std::string city = iri(fmt::format("city{}", i));
    out << city << ' ' << type << ' ' << iri("city") << " .\n";
    out << city << ' ' << iri("name") << " \"City " << i << "\" .\n";
    out << city << ' ' << iri("population") << ' ' << integer(1000 + 37ull * i) << " .\n";
    if (i <= 300) {
      out << city << ' ' << iri("located") << ' ' << iri("Germany") << " .\n";
    } else if (i <= 2000) {
      out << city << ' ' << iri("located") << ' ' << iri(kElsewhere[i % 5]) << " .\n";
    }
    out << city << ' ' << iri("mayor") << ' ' << iri(fmt::format("person{}", i)) << " .\n";
  }
  for (int i = 1; i <= 2000; ++i) {
    std::string company = iri(fmt::format("company{}", i));
    out << company << ' ' << type << ' ' << iri("company") << " .\n";
    out << company << ' ' << iri("revenue") << ' ' << integer(1000000000ull + 7919ull * i) << " .\n";
    if (i <= 1500) {
      if (i == 1) {
        out << company << ' ' << iri("name") << " \"Apple\" .\n";
      } else {
        out << company << ' ' << iri("name") << " \"Company " << i << "\" .\n";
      }
    }
  }
}

}  // namespace partout::bench
