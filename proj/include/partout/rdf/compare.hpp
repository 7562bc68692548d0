#pragma once

#include <cstdint>
#include <string_view>

#include "partout/rdf/term.hpp"

namespace partout::rdf {

enum class CompareOp : std::uint8_t { Less = 0, LessEq, Equal, GreaterEq, Greater };

std::string_view op_symbol(CompareOp op);

/// Value space a term falls in for ordering comparisons.
enum class ValueCategory : std::uint8_t { Numeric = 0, String = 1, Iri = 2 };

ValueCategory category(const Term& term);

/// `value op constant`.
///  - `=` is term identity (kind and full lexical form).
///  - Ordering operators hold only when both terms share a value category:
///    numeric literals compare by number, other literals by their quoted
///    content, IRIs by their text. Mixed categories compare false.
bool compare(const Term& value, CompareOp op, const Term& constant);

}  // namespace partout::rdf
