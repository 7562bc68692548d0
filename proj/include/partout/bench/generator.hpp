#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "partout/rdf/dictionary.hpp"
#include "partout/rdf/triple_store.hpp"
#include "partout/sparql/query.hpp"

namespace partout::bench {

inline constexpr std::string_view kSynth = "http://example.org/synth/";

/// People, organizations, cities and countries linked by knows, worksFor,
/// livesIn, locatedIn and partOf. Emits at least `target_triples` distinct
/// triples; returns the count. Deterministic under `seed`.
std::uint64_t write_synthetic_dataset(std::ostream& out, std::uint64_t target_triples, std::uint64_t seed);

enum class Shape : std::uint8_t { Star, Path };

struct GenConfig {
  std::uint32_t count = 100;
  std::uint32_t max_star = 6;
  std::uint32_t max_path = 4;
  std::uint64_t seed = 1;
};

struct GeneratedQuery {
  Shape shape = Shape::Star;
  std::string text;
  sparql::Query query;
};

struct GeneratedSet {
  std::vector<GeneratedQuery> queries;
  /// One line per skipped attempt.
  std::vector<std::string> notices;

  std::vector<sparql::LogEntry> log() const;
};

/// Random star (shared subject) and path (object to subject) queries grown
/// from a witness in the data, so each has at least one result.
GeneratedSet generate_queries(const rdf::TripleStore& store, const rdf::Dictionary& dict, const GenConfig& cfg);

}  // namespace partout::bench
