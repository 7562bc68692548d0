#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "partout/rdf/term.hpp"
#include "partout/sparql/query.hpp"

namespace partout::workload {

using QueryLog = std::vector<sparql::LogEntry>;

std::uint64_t total_queries(const QueryLog& log);

struct ConstantFrequencies {
  /// Subject and object constants; the only ones eligible for normalization.
  std::map<rdf::Term, std::uint64_t> subject_object;
  std::map<rdf::Term, std::uint64_t> property;
};

/// Occurrences of every constant over all branches, required and optional
/// patterns, weighted by multiplicity.
ConstantFrequencies constant_frequencies(const QueryLog& log);

/// A triple pattern with every variable replaced by the single symbol Ω
/// (represented by an empty optional).
struct AnonPattern {
  std::optional<rdf::Term> s, p, o;

  friend bool operator==(const AnonPattern&, const AnonPattern&) = default;
  friend auto operator<=>(const AnonPattern&, const AnonPattern&) = default;
};

AnonPattern anonymize(const sparql::TriplePattern& pattern);
std::string to_string(const AnonPattern& pattern);

/// Replaces every subject/object constant whose frequency is below `theta`
/// with a fresh variable that joins nothing. Properties are never replaced.
QueryLog normalize(const QueryLog& log, std::uint64_t theta);

/// Φ(QL) with f(p): the multiplicity-weighted number of queries containing p.
using PatternFrequencies = std::map<AnonPattern, std::uint64_t>;

PatternFrequencies normalize_and_anonymize(const QueryLog& log, std::uint64_t theta);

using PatternEdge = std::pair<AnonPattern, AnonPattern>;  // first <= second

struct GlobalQueryGraph {
  PatternFrequencies nodes;
  std::map<PatternEdge, std::uint64_t> edges;

  std::uint64_t weight(const AnonPattern& a, const AnonPattern& b) const;
  /// `pattern<TAB>pattern<TAB>weight` per edge.
  void write(std::ostream& out) const;
};

GlobalQueryGraph build_global_query_graph(const QueryLog& log, std::uint64_t theta);

}  // namespace partout::workload
