#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "partout/rdf/dictionary.hpp"
#include "partout/rdf/triple_store.hpp"

namespace partout::rdf {

using TermTriple = std::array<Term, 3>;

/// Parses one N-Triples statement. Returns nullopt for blank and comment
/// lines. Throws ParseError carrying `line_no`.
std::optional<TermTriple> parse_ntriples_line(std::string_view line, std::size_t line_no);

/// Parses a whole document, interning terms in line order and
/// subject/property/object order within a line.
std::vector<Triple> parse_ntriples(std::istream& in, Dictionary& dict);

/// Streams statements without touching a dictionary.
void for_each_ntriple(std::istream& in, const std::function<void(TermTriple&&)>& sink);

std::string format_ntriples(const TermTriple& triple);
std::string format_ntriples(const Triple& triple, const Dictionary& dict);

/// Writes every triple of `store` in SPO order.
void write_ntriples(std::ostream& out, const TripleStore& store, const Dictionary& dict);

}  // namespace partout::rdf
