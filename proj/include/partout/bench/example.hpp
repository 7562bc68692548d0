#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

namespace partout::bench {

inline constexpr std::string_view kDb = "http://example.org/db/";

/// The five-query running-example log (multiplicities 2, 1, 1, 1, 10).
std::string example_query_log();

/// The three-pattern German-city-names query.
std::string example_city_query();

/// Synthetic cities/companies dataset: 3000 city types, 2000 company types,
/// 2000 revenues (all >= 10^9), 4500 names (one "Apple"), 300 located in
/// Germany, 1700 located elsewhere, 3000 populations, 3000 filler triples.
void write_example_dataset(std::ostream& out);

}  // namespace partout::bench
