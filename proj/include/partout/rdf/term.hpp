#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace partout::rdf {

enum class TermKind : std::uint8_t { Iri = 0, Literal = 1 };

/// An RDF term. IRIs are stored without angle brackets, blank nodes as
/// `_:label` IRIs. Literals keep their full N-Triples spelling including
/// quotes, escapes, and any `@lang` / `^^<datatype>` suffix.
struct Term {
  TermKind kind = TermKind::Iri;
  std::string lexical;

  static Term iri(std::string value) { return {TermKind::Iri, std::move(value)}; }
  /// Plain literal from its unquoted, already-escaped content.
  static Term plain_literal(std::string_view content) {
    return {TermKind::Literal, "\"" + std::string(content) + "\""};
  }
  static Term typed_literal(std::string_view content, std::string_view datatype) {
    return {TermKind::Literal,
            "\"" + std::string(content) + "\"^^<" + std::string(datatype) + ">"};
  }

  bool is_iri() const { return kind == TermKind::Iri; }
  bool is_literal() const { return kind == TermKind::Literal; }

  friend bool operator==(const Term&, const Term&) = default;
  friend auto operator<=>(const Term&, const Term&) = default;
};

struct TermHash {
  std::size_t operator()(const Term& t) const noexcept {
    return std::hash<std::string>{}(t.lexical) ^ static_cast<std::size_t>(t.kind);
  }
};

inline constexpr std::string_view kXsdInteger = "http://www.w3.org/2001/XMLSchema#integer";
inline constexpr std::string_view kXsdDecimal = "http://www.w3.org/2001/XMLSchema#decimal";
inline constexpr std::string_view kXsdDouble = "http://www.w3.org/2001/XMLSchema#double";
inline constexpr std::string_view kRdfType = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

/// Content of a literal between its quotes (escapes untouched); the IRI for IRIs.
std::string_view value_text(const Term& term);

/// Numeric value of a literal whose content is a decimal number.
std::optional<double> numeric_value(const Term& term);

/// Strict decimal-number test used for literal contents and SPARQL numbers.
std::optional<double> parse_number(std::string_view text);

/// N-Triples spelling: `<iri>`, `_:b`, or the literal as stored.
std::string to_ntriples(const Term& term);
/// Inverse of to_ntriples for well-formed input.
Term from_ntriples(std::string_view text);

}  // namespace partout::rdf
