#include "partout/rdf/ntriples.hpp"

#include <cctype>
#include <functional>
#include <istream>
#include <ostream>
#include <string>

#include "partout/error.hpp"

namespace partout::rdf {

namespace {

class LineCursor {
 public:
  LineCursor(std::string_view text, std::size_t line_no) : text_(text), line_no_(line_no) {}

  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' ||
                                   text_[pos_] == '\r')) {
      ++pos_;
    }
  }
  void finish() {
    skip_ws();
    if (peek() != '.') fail("expected '.' after object");
    ++pos_;
    skip_ws();
    if (!at_end() && peek() != '#') fail("trailing characters after '.'");
  }

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return at_end() ? '\0' : text_[pos_]; }

  [[noreturn]] void fail(const std::string& reason) const { throw ParseError(line_no_, reason); }

  std::string iri() {
    // at '<'
    ++pos_;
    std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != '>') {
      char c = text_[pos_];
      if (c == ' ' || c == '<' || c == '"' || c == '{' || c == '}' || c == '|' || c == '^' ||
          c == '`') {
        fail("invalid character in IRI");
      }
      ++pos_;
    }
    if (at_end()) fail("unterminated IRI");
    std::string value(text_.substr(start, pos_ - start));
    ++pos_;
    if (value.empty()) fail("empty IRI");
    return value;
  }

  std::string blank_node() {
    // at '_'
    if (pos_ + 1 >= text_.size() || text_[pos_ + 1] != ':') fail("malformed blank node");
    std::size_t start = pos_;
    pos_ += 2;
    while (pos_ < text_.size() && text_[pos_] != ' ' && text_[pos_] != '\t' &&
           text_[pos_] != '.') {
      ++pos_;
    }
    if (pos_ - start <= 2) fail("empty blank node label");
    return std::string(text_.substr(start, pos_ - start));
  }

  std::string literal() {
    // at '"'
    std::size_t start = pos_;
    ++pos_;
    bool closed = false;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '\\') {
        if (pos_ + 1 >= text_.size()) fail("dangling escape in literal");
        char e = text_[pos_ + 1];
        if (e == 'u' || e == 'U') {
          std::size_t digits = e == 'u' ? 4 : 8;
          if (pos_ + 1 + digits >= text_.size()) fail("truncated unicode escape");
          for (std::size_t k = 0; k < digits; ++k) {
            if (!std::isxdigit(static_cast<unsigned char>(text_[pos_ + 2 + k]))) {
              fail("bad unicode escape");
            }
          }
          pos_ += 2 + digits;
          continue;
        }
        if (std::string_view("tbnrf\"'\\").find(e) == std::string_view::npos) {
          fail("unknown escape in literal");
        }
        pos_ += 2;
        continue;
      }
      if (c == '"') {
        closed = true;
        ++pos_;
        break;
      }
      if (c == '\n') fail("newline in literal");
      ++pos_;
    }
    if (!closed) fail("unterminated literal");
    if (peek() == '@') {
      ++pos_;
      std::size_t tag_start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '-')) {
        ++pos_;
      }
      if (pos_ == tag_start) fail("empty language tag");
    } else if (peek() == '^') {
      if (pos_ + 1 >= text_.size() || text_[pos_ + 1] != '^') fail("malformed datatype");
      pos_ += 2;
      if (peek() != '<') fail("datatype must be an IRI");
      iri();
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  Term term(const char* position) {
    skip_ws();
    char c = peek();
    if (c == '<') return Term::iri(iri());
    if (c == '_') return Term::iri(blank_node());
    if (c == '"') return Term{TermKind::Literal, literal()};
    if (at_end()) fail(std::string("missing ") + position);
    fail(std::string("unexpected character '") + c + "' at " + position);
  }

 private:
  std::string_view text_;
  std::size_t line_no_;
  std::size_t pos_ = 0;
};

}  // namespace

std::optional<TermTriple> parse_ntriples_line(std::string_view line, std::size_t line_no) {
  LineCursor cur(line, line_no);
  cur.skip_ws();
  if (cur.at_end() || cur.peek() == '#') return std::nullopt;
  Term s = cur.term("subject");
  if (s.is_literal()) cur.fail("literal subject");
  Term p = cur.term("property");
  if (p.is_literal()) cur.fail("literal property");
  if (p.lexical.starts_with("_:")) cur.fail("blank node property");
  Term o = cur.term("object");
  cur.finish();
  return TermTriple{std::move(s), std::move(p), std::move(o)};
}

void for_each_ntriple(std::istream& in, const std::function<void(TermTriple&&)>& sink) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto t = parse_ntriples_line(line, line_no)) sink(std::move(*t));
  }
}

std::vector<Triple> parse_ntriples(std::istream& in, Dictionary& dict) {
  std::vector<Triple> out;
  for_each_ntriple(in, [&](TermTriple&& t) {
    Triple triple;
    triple.s = dict.intern(t[0]);
    triple.p = dict.intern(t[1]);
    triple.o = dict.intern(t[2]);
    out.push_back(triple);
  });
  return out;
}

std::string format_ntriples(const TermTriple& triple) {
  return to_ntriples(triple[0]) + " " + to_ntriples(triple[1]) + " " + to_ntriples(triple[2]) +
         " .";
}

std::string format_ntriples(const Triple& triple, const Dictionary& dict) {
  return format_ntriples(TermTriple{dict.term(triple.s), dict.term(triple.p), dict.term(triple.o)});
}

void write_ntriples(std::ostream& out, const TripleStore& store, const Dictionary& dict) {
  for (const Triple& t : store.triples()) out << format_ntriples(t, dict) << '\n';
}

}  // namespace partout::rdf
