#include "partout/rdf/term.hpp"

#include <cctype>
#include <charconv>

namespace partout::rdf {

std::string_view value_text(const Term& term) {
  std::string_view lex = term.lexical;
  if (term.is_iri()) return lex;
  if (lex.size() < 2 || lex.front() != '"') return lex;
  // The closing quote is the last unescaped '"'.
  std::size_t close = lex.size();
  for (std::size_t i = 1; i < lex.size(); ++i) {
    if (lex[i] == '\\') {
      ++i;
      continue;
    }
    if (lex[i] == '"') {
      close = i;
      break;
    }
  }
  if (close == lex.size()) return lex.substr(1);
  return lex.substr(1, close - 1);
}

std::optional<double> parse_number(std::string_view text) {
  if (text.empty()) return std::nullopt;
  std::size_t i = 0;
  if (text[i] == '+' || text[i] == '-') ++i;
  bool digits = false;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
    ++i;
    digits = true;
  }
  if (i < text.size() && text[i] == '.') {
    ++i;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
      ++i;
      digits = true;
    }
  }
  if (!digits) return std::nullopt;
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) ++i;
    bool exp_digits = false;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
      ++i;
      exp_digits = true;
    }
    if (!exp_digits) return std::nullopt;
  }
  if (i != text.size()) return std::nullopt;

  std::string_view body = text;
  if (body.front() == '+') body.remove_prefix(1);
  double value = 0;
  auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), value);
  if (ec != std::errc() || ptr != body.data() + body.size()) return std::nullopt;
  return value;
}

std::optional<double> numeric_value(const Term& term) {
  if (!term.is_literal()) return std::nullopt;
  return parse_number(value_text(term));
}

std::string to_ntriples(const Term& term) {
  if (term.is_literal()) return term.lexical;
  if (term.lexical.starts_with("_:")) return term.lexical;
  return "<" + term.lexical + ">";
}

Term from_ntriples(std::string_view text) {
  if (text.starts_with("\"")) return {TermKind::Literal, std::string(text)};
  if (text.size() >= 2 && text.front() == '<' && text.back() == '>') {
    return Term::iri(std::string(text.substr(1, text.size() - 2)));
  }
  return Term::iri(std::string(text));
}

}  // namespace partout::rdf
