#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "partout/rdf/compare.hpp"
#include "partout/rdf/term.hpp"

namespace partout::sparql {

struct Variable {
  std::string name;  // without the leading '?'

  friend bool operator==(const Variable&, const Variable&) = default;
  friend auto operator<=>(const Variable&, const Variable&) = default;
};

using PatternTerm = std::variant<Variable, rdf::Term>;

inline bool is_variable(const PatternTerm& t) { return std::holds_alternative<Variable>(t); }
inline const std::string& var_name(const PatternTerm& t) { return std::get<Variable>(t).name; }
inline const rdf::Term& constant(const PatternTerm& t) { return std::get<rdf::Term>(t); }

struct TriplePattern {
  PatternTerm s, p, o;

  friend bool operator==(const TriplePattern&, const TriplePattern&) = default;
};

struct Compare {
  std::string var;
  rdf::CompareOp op = rdf::CompareOp::Equal;
  rdf::Term constant;

  friend bool operator==(const Compare&, const Compare&) = default;
};

struct IsIri {
  std::string var;
  friend bool operator==(const IsIri&, const IsIri&) = default;
};

struct IsLiteral {
  std::string var;
  friend bool operator==(const IsLiteral&, const IsLiteral&) = default;
};

using FilterExpr = std::variant<Compare, IsIri, IsLiteral>;

const std::string& filter_var(const FilterExpr& f);
bool evaluate(const FilterExpr& f, const rdf::Term& value);

/// One branch b = (T(b), O(b), F(b)).
struct GraphPattern {
  std::vector<TriplePattern> required;
  std::vector<TriplePattern> optional;
  std::vector<FilterExpr> filters;

  friend bool operator==(const GraphPattern&, const GraphPattern&) = default;
};

struct Query {
  bool select_all = false;
  std::vector<std::string> projection;
  /// More than one branch means a UNION of the branches.
  std::vector<GraphPattern> branches;

  friend bool operator==(const Query&, const Query&) = default;
};

/// Variables of the patterns, in order of first appearance (required first).
std::vector<std::string> variables(const std::vector<TriplePattern>& patterns);
std::vector<std::string> variables(const GraphPattern& branch);

/// Output columns: the projection, or every variable of every branch.
std::vector<std::string> output_variables(const Query& query);

/// Parses the supported SPARQL subset. Throws ParseError on syntax errors
/// and UnsupportedError on recognised but unsupported features.
Query parse_sparql(std::string_view text);

/// Canonical text with full IRIs; parse_sparql(render(q)) == q.
std::string render(const Query& query);
std::string render(const TriplePattern& pattern);
std::string render(const FilterExpr& filter);

/// nullopt when the query can be executed; otherwise the reason it cannot.
std::optional<std::string> validate_executable(const Query& query);

struct LogEntry {
  Query query;
  std::uint64_t multiplicity = 1;
};

/// Query-log files: queries separated by lines holding only `###`, each
/// optionally preceded by a `#x N` multiplicity line.
std::vector<LogEntry> parse_query_log(std::istream& in);
void write_query_log(std::ostream& out, const std::vector<LogEntry>& log);

}  // namespace partout::sparql
