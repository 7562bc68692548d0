#include "partout/rdf/compare.hpp"

#include <array>

namespace partout::rdf {

std::string_view op_symbol(CompareOp op) {
  static constexpr std::array<std::string_view, 5> kSymbols = {"<", "<=", "=", ">=", ">"};
  return kSymbols[static_cast<std::size_t>(op)];
}

ValueCategory category(const Term& term) {
  if (term.is_iri()) return ValueCategory::Iri;
  return numeric_value(term) ? ValueCategory::Numeric : ValueCategory::String;
}

namespace {

template <typename T>
bool ordered(const T& a, CompareOp op, const T& b) {
  switch (op) {
    case CompareOp::Less: return a < b;
    case CompareOp::LessEq: return a <= b;
    case CompareOp::Equal: return a == b;
    case CompareOp::GreaterEq: return a >= b;
    case CompareOp::Greater: return a > b;
  }
  return false;
}

}  // namespace

bool compare(const Term& value, CompareOp op, const Term& constant) {
  if (op == CompareOp::Equal) return value == constant;
  if (value.is_iri() != constant.is_iri()) return false;
  if (value.is_iri()) return ordered(value.lexical, op, constant.lexical);
  auto a = numeric_value(value);
  auto b = numeric_value(constant);
  if (a.has_value() != b.has_value()) return false;
  if (a) return ordered(*a, op, *b);
  return ordered(value_text(value), op, value_text(constant));
}

}  // namespace partout::rdf
