#include <algorithm>
#include <cctype>
#include <map>
#include <string>

#include "partout/error.hpp"
#include "partout/sparql/query.hpp"

namespace partout::sparql {

namespace {

enum class Tok { IriRef, PName, Var, String, LangTag, DoubleCaret, Number, Word, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;  // IRI content, prefixed name, var name, literal lexical, ...
  std::string datatype;  // numbers only
  std::size_t begin = 0, end = 0, line = 1;
};

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
         static_cast<unsigned char>(c) >= 0x80;
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_ws_and_comments();
      Token t;
      t.begin = pos_;
      t.line = line_;
      if (pos_ >= text_.size()) {
        t.kind = Tok::End;
        t.end = pos_;
        out.push_back(t);
        return out;
      }
      lex_one(t);
      t.end = pos_;
      out.push_back(std::move(t));
    }
  }

 private:
  [[noreturn]] void fail(const std::string& reason) const {
    throw ParseError(line_, reason + " (offset " + std::to_string(pos_) + ")");
  }

  char at(std::size_t i) const { return i < text_.size() ? text_[i] : '\0'; }

  void skip_ws_and_comments() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '\n') {
        ++line_;
        ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  bool looks_like_iri() const {
    for (std::size_t i = pos_ + 1; i < text_.size(); ++i) {
      char c = text_[i];
      if (c == '>') return i > pos_ + 1;
      if (std::isspace(static_cast<unsigned char>(c)) || c == '<' || c == '"' || c == '{' ||
          c == '}' || c == '|' || c == '^' || c == '`' || c == '\\') {
        return false;
      }
    }
    return false;
  }

  void lex_one(Token& t) {
    char c = text_[pos_];
    if (c == '<' && looks_like_iri()) {
      std::size_t close = text_.find('>', pos_);
      t.kind = Tok::IriRef;
      t.text = std::string(text_.substr(pos_ + 1, close - pos_ - 1));
      pos_ = close + 1;
      return;
    }
    if (c == '?' || c == '$') {
      std::size_t start = pos_ + 1;
      std::size_t i = start;
      while (i < text_.size() && is_name_char(text_[i]) && text_[i] != '-') ++i;
      if (i == start) {
        t.kind = Tok::Punct;
        t.text = std::string(1, c);
        ++pos_;
        return;
      }
      t.kind = Tok::Var;
      t.text = std::string(text_.substr(start, i - start));
      pos_ = i;
      return;
    }
    if (c == '"' || c == '\'') {
      lex_string(t, c);
      return;
    }
    if (c == '@') {
      std::size_t i = pos_ + 1;
      while (i < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[i])) ||
                                  text_[i] == '-')) {
        ++i;
      }
      if (i == pos_ + 1) fail("empty language tag");
      t.kind = Tok::LangTag;
      t.text = std::string(text_.substr(pos_, i - pos_));
      pos_ = i;
      return;
    }
    if (c == '^' && at(pos_ + 1) == '^') {
      t.kind = Tok::DoubleCaret;
      t.text = "^^";
      pos_ += 2;
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        ((c == '+' || c == '-' || c == '.') && std::isdigit(static_cast<unsigned char>(at(pos_ + 1))))) {
      lex_number(t);
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == ':') {
      lex_name(t);
      return;
    }
    static constexpr std::string_view kTwoChar[] = {"<=", ">=", "!=", "&&", "||"};
    for (auto op : kTwoChar) {
      if (text_.substr(pos_, 2) == op) {
        t.kind = Tok::Punct;
        t.text = std::string(op);
        pos_ += 2;
        return;
      }
    }
    if (std::string_view("{}().;,*=<>!/|^+[]").find(c) != std::string_view::npos) {
      t.kind = Tok::Punct;
      t.text = std::string(1, c);
      ++pos_;
      return;
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  void lex_string(Token& t, char quote) {
    if (text_.substr(pos_, 3) == std::string(3, quote)) {
      throw UnsupportedError("unsupported feature: long string literal at [" +
                             std::to_string(pos_) + "," + std::to_string(pos_ + 3) + ")");
    }
    std::string content;
    std::size_t i = pos_ + 1;
    bool closed = false;
    while (i < text_.size()) {
      char ch = text_[i];
      if (ch == '\\') {
        char e = at(i + 1);
        if (e == '\0') fail("dangling escape");
        if (quote == '\'' && e == '\'') {
          content += '\'';
        } else {
          content += ch;
          content += e;
        }
        i += 2;
        continue;
      }
      if (ch == '\n') fail("newline in string literal");
      if (ch == quote) {
        closed = true;
        ++i;
        break;
      }
      if (quote == '\'' && ch == '"') {
        content += "\\\"";
      } else {
        content += ch;
      }
      ++i;
    }
    if (!closed) fail("unterminated string literal");
    t.kind = Tok::String;
    t.text = "\"" + content + "\"";
    pos_ = i;
  }

  void lex_number(Token& t) {
    std::size_t i = pos_;
    if (text_[i] == '+' || text_[i] == '-') ++i;
    bool has_dot = false, has_exp = false;
    while (i < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i]))) ++i;
    if (at(i) == '.' && std::isdigit(static_cast<unsigned char>(at(i + 1)))) {
      has_dot = true;
      ++i;
      while (i < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i]))) ++i;
    }
    if (at(i) == 'e' || at(i) == 'E') {
      std::size_t j = i + 1;
      if (at(j) == '+' || at(j) == '-') ++j;
      if (std::isdigit(static_cast<unsigned char>(at(j)))) {
        has_exp = true;
        i = j;
        while (i < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i]))) ++i;
      }
    }
    t.kind = Tok::Number;
    t.text = std::string(text_.substr(pos_, i - pos_));
    t.datatype = std::string(has_exp   ? rdf::kXsdDouble
                             : has_dot ? rdf::kXsdDecimal
                                       : rdf::kXsdInteger);
    pos_ = i;
  }

  void lex_name(Token& t) {
    std::size_t i = pos_;
    while (i < text_.size() && (is_name_char(text_[i]) || text_[i] == '.')) ++i;
    // a name never ends with '.'
    while (i > pos_ && text_[i - 1] == '.') --i;
    if (at(i) == ':') {
      ++i;
      while (i < text_.size() && (is_name_char(text_[i]) || text_[i] == '.' || text_[i] == ':' ||
                                  text_[i] == '%')) {
        ++i;
      }
      while (text_[i - 1] == '.') --i;
      t.kind = Tok::PName;
    } else {
      t.kind = Tok::Word;
    }
    t.text = std::string(text_.substr(pos_, i - pos_));
    pos_ = i;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : tokens_(Lexer(text).run()) {
    prefixes_["rdf"] = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
    prefixes_["rdfs"] = "http://www.w3.org/2000/01/rdf-schema#";
    prefixes_["xsd"] = "http://www.w3.org/2001/XMLSchema#";
  }

  Query parse() {
    prologue();
    Query q;
    const Token& head = peek();
    if (is_word(head, "CONSTRUCT") || is_word(head, "ASK") || is_word(head, "DESCRIBE")) {
      unsupported(head, upper(head.text) + " queries");
    }
    if (!is_word(head, "SELECT")) fail(head, "expected SELECT");
    next();
    if (is_word(peek(), "DISTINCT") || is_word(peek(), "REDUCED")) {
      unsupported(peek(), upper(peek().text));
    }
    if (is_punct(peek(), "*")) {
      next();
      q.select_all = true;
    } else {
      while (peek().kind == Tok::Var) q.projection.push_back(next().text);
      if (is_punct(peek(), "(")) unsupported(peek(), "projection expressions / aggregates");
      if (q.projection.empty()) fail(peek(), "expected projection variables or '*'");
    }
    if (is_word(peek(), "FROM")) unsupported(peek(), "FROM clauses");
    if (is_word(peek(), "WHERE")) next();
    q.branches = where_group();
    const Token& tail = peek();
    if (tail.kind != Tok::End) {
      static constexpr std::string_view kModifiers[] = {"ORDER", "LIMIT", "OFFSET", "GROUP",
                                                        "HAVING", "VALUES"};
      for (auto m : kModifiers) {
        if (is_word(tail, m)) unsupported(tail, std::string(m));
      }
      fail(tail, "unexpected '" + tail.text + "' after query");
    }
    check(q);
    return q;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
  }
  const Token& next() {
    const Token& t = tokens_[pos_];
    if (pos_ + 1 < tokens_.size()) ++pos_;
    return t;
  }

  static bool is_word(const Token& t, std::string_view w) {
    return t.kind == Tok::Word && upper(t.text) == upper(w);
  }
  static bool is_punct(const Token& t, std::string_view p) {
    return t.kind == Tok::Punct && t.text == p;
  }

  [[noreturn]] static void fail(const Token& t, const std::string& reason) {
    throw ParseError(t.line, reason + " (offset " + std::to_string(t.begin) + ")");
  }
  [[noreturn]] static void unsupported(const Token& t, const std::string& feature) {
    throw UnsupportedError("unsupported feature: " + feature + " at [" + std::to_string(t.begin) +
                           "," + std::to_string(t.end) + ")");
  }

  void expect_punct(std::string_view p) {
    if (!is_punct(peek(), p)) fail(peek(), "expected '" + std::string(p) + "'");
    next();
  }

  void prologue() {
    while (true) {
      if (is_word(peek(), "PREFIX")) {
        next();
        const Token& name = next();
        if (name.kind != Tok::PName || name.text.back() != ':' ||
            name.text.find(':') != name.text.size() - 1) {
          fail(name, "expected prefix name ending in ':'");
        }
        const Token& iri = next();
        if (iri.kind != Tok::IriRef) fail(iri, "expected IRI in PREFIX declaration");
        prefixes_[name.text.substr(0, name.text.size() - 1)] = iri.text;
      } else if (is_word(peek(), "BASE")) {
        unsupported(peek(), "BASE");
      } else {
        return;
      }
    }
  }

  std::string expand(const Token& t) {
    auto colon = t.text.find(':');
    std::string prefix = t.text.substr(0, colon);
    auto it = prefixes_.find(prefix);
    if (it == prefixes_.end()) fail(t, "undeclared prefix '" + prefix + ":'");
    return it->second + t.text.substr(colon + 1);
  }

  std::vector<GraphPattern> where_group() {
    expect_punct("{");
    if (is_punct(peek(), "{")) {
      std::vector<GraphPattern> branches;
      branches.push_back(braced_branch());
      while (is_word(peek(), "UNION")) {
        next();
        if (!is_punct(peek(), "{")) fail(peek(), "expected '{' after UNION");
        branches.push_back(braced_branch());
      }
      if (!is_punct(peek(), "}")) unsupported(peek(), "group patterns mixing UNION with other patterns");
      next();
      return branches;
    }
    GraphPattern branch;
    group_body(branch, /*in_optional=*/false);
    expect_punct("}");
    return {std::move(branch)};
  }

  GraphPattern braced_branch() {
    expect_punct("{");
    if (is_punct(peek(), "{")) unsupported(peek(), "nested group patterns");
    GraphPattern branch;
    group_body(branch, false);
    expect_punct("}");
    return branch;
  }

  void group_body(GraphPattern& branch, bool in_optional) {
    while (true) {
      const Token& t = peek();
      if (is_punct(t, "}")) return;
      if (t.kind == Tok::End) fail(t, "unterminated group pattern");
      if (is_punct(t, ".")) {
        next();
        continue;
      }
      if (is_word(t, "OPTIONAL")) {
        if (in_optional) unsupported(t, "nested OPTIONAL");
        next();
        expect_punct("{");
        group_body(branch, true);
        expect_punct("}");
        continue;
      }
      if (is_word(t, "FILTER")) {
        next();
        filter(branch);
        continue;
      }
      static constexpr std::string_view kUnsupported[] = {"BIND", "VALUES", "MINUS", "GRAPH",
                                                          "SERVICE", "SELECT", "UNION"};
      for (auto w : kUnsupported) {
        if (is_word(t, w)) {
          unsupported(t, w == "SELECT" ? std::string("subqueries") : std::string(w));
        }
      }
      if (is_punct(t, "{")) unsupported(t, "nested group patterns");
      triples(in_optional ? branch.optional : branch.required);
    }
  }

  PatternTerm subject_or_object(bool object_position) {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Var: return Variable{next().text};
      case Tok::IriRef: return rdf::Term::iri(next().text);
      case Tok::PName: {
        next();
        return rdf::Term::iri(expand(t));
      }
      case Tok::String:
      case Tok::Number: {
        rdf::Term lit = literal();
        if (!object_position) fail(t, "literal subject");
        return lit;
      }
      case Tok::Word:
        if (object_position && (t.text == "true" || t.text == "false")) {
          next();
          return rdf::Term::typed_literal(t.text, "http://www.w3.org/2001/XMLSchema#boolean");
        }
        if (t.text == "_") unsupported(t, "blank nodes in queries");
        break;
      case Tok::Punct:
        if (t.text == "[" || t.text == "(") unsupported(t, "blank node / collection syntax");
        break;
      default: break;
    }
    if (t.kind == Tok::PName && t.text.starts_with("_:")) unsupported(t, "blank nodes in queries");
    fail(t, "expected a term, found '" + t.text + "'");
  }

  rdf::Term literal() {
    const Token& t = next();
    if (t.kind == Tok::Number) return rdf::Term::typed_literal(t.text, t.datatype);
    std::string lexical = t.text;
    if (peek().kind == Tok::LangTag) {
      lexical += next().text;
    } else if (peek().kind == Tok::DoubleCaret) {
      next();
      const Token& dt = next();
      if (dt.kind == Tok::IriRef) {
        lexical += "^^<" + dt.text + ">";
      } else if (dt.kind == Tok::PName) {
        lexical += "^^<" + expand(dt) + ">";
      } else {
        fail(dt, "expected datatype IRI");
      }
    }
    return rdf::Term{rdf::TermKind::Literal, lexical};
  }

  PatternTerm verb() {
    const Token& t = peek();
    if (t.kind == Tok::Word && t.text == "a") {
      next();
      return rdf::Term::iri(std::string(rdf::kRdfType));
    }
    if (is_punct(t, "^") || is_punct(t, "!") || is_punct(t, "(")) unsupported(t, "property paths");
    if (t.kind == Tok::Var) return Variable{next().text};
    if (t.kind == Tok::IriRef) return rdf::Term::iri(next().text);
    if (t.kind == Tok::PName) {
      next();
      return rdf::Term::iri(expand(t));
    }
    if (t.kind == Tok::String || t.kind == Tok::Number) fail(t, "literal property");
    fail(t, "expected a property, found '" + t.text + "'");
  }

  void triples(std::vector<TriplePattern>& out) {
    PatternTerm s = subject_or_object(false);
    while (true) {
      PatternTerm p = verb();
      const Token& after = peek();
      if (is_punct(after, "/") || is_punct(after, "|") || is_punct(after, "*") ||
          is_punct(after, "+") || is_punct(after, "?")) {
        unsupported(after, "property paths");
      }
      while (true) {
        PatternTerm o = subject_or_object(true);
        out.push_back(TriplePattern{s, p, std::move(o)});
        if (!is_punct(peek(), ",")) break;
        next();
      }
      if (!is_punct(peek(), ";")) break;
      while (is_punct(peek(), ";")) next();
      if (is_punct(peek(), ".") || is_punct(peek(), "}")) break;
    }
    const Token& end = peek();
    if (!is_punct(end, ".") && !is_punct(end, "}") && !is_punct(end, "{") &&
        end.kind != Tok::Word) {
      fail(end, "expected '.' or '}' after triple pattern");
    }
  }

  void filter(GraphPattern& branch) {
    const Token& t = peek();
    if (t.kind == Tok::Word) {
      branch.filters.push_back(builtin());
      return;
    }
    expect_punct("(");
    conjunction(branch.filters);
    expect_punct(")");
  }

  void conjunction(std::vector<FilterExpr>& out) {
    while (true) {
      primary(out);
      if (is_punct(peek(), "||")) unsupported(peek(), "disjunctive filters");
      if (!is_punct(peek(), "&&")) return;
      next();
    }
  }

  void primary(std::vector<FilterExpr>& out) {
    const Token& t = peek();
    if (is_punct(t, "(")) {
      next();
      conjunction(out);
      expect_punct(")");
      return;
    }
    if (is_punct(t, "!")) unsupported(t, "negated filters");
    if (t.kind == Tok::Word && !(t.text == "true" || t.text == "false")) {
      out.push_back(builtin());
      return;
    }
    // comparison: one variable and one constant
    bool var_left = t.kind == Tok::Var;
    std::string var;
    rdf::Term constant_term;
    if (var_left) {
      var = next().text;
    } else {
      constant_term = filter_constant();
    }
    const Token& op_tok = next();
    rdf::CompareOp op;
    if (is_punct(op_tok, "<")) {
      op = rdf::CompareOp::Less;
    } else if (is_punct(op_tok, "<=")) {
      op = rdf::CompareOp::LessEq;
    } else if (is_punct(op_tok, "=")) {
      op = rdf::CompareOp::Equal;
    } else if (is_punct(op_tok, ">=")) {
      op = rdf::CompareOp::GreaterEq;
    } else if (is_punct(op_tok, ">")) {
      op = rdf::CompareOp::Greater;
    } else if (is_punct(op_tok, "!=")) {
      unsupported(op_tok, "'!=' comparisons");
    } else {
      fail(op_tok, "expected comparison operator");
    }
    if (var_left) {
      if (peek().kind == Tok::Var) unsupported(peek(), "variable-to-variable comparisons");
      constant_term = filter_constant();
    } else {
      if (peek().kind != Tok::Var) fail(peek(), "comparison needs a variable");
      var = next().text;
      // c op ?v  ==  ?v op' c
      switch (op) {
        case rdf::CompareOp::Less: op = rdf::CompareOp::Greater; break;
        case rdf::CompareOp::LessEq: op = rdf::CompareOp::GreaterEq; break;
        case rdf::CompareOp::GreaterEq: op = rdf::CompareOp::LessEq; break;
        case rdf::CompareOp::Greater: op = rdf::CompareOp::Less; break;
        case rdf::CompareOp::Equal: break;
      }
    }
    out.push_back(Compare{var, op, constant_term});
  }

  rdf::Term filter_constant() {
    const Token& t = peek();
    if (t.kind == Tok::String || t.kind == Tok::Number) return literal();
    if (t.kind == Tok::IriRef) return rdf::Term::iri(next().text);
    if (t.kind == Tok::PName) {
      next();
      return rdf::Term::iri(expand(t));
    }
    if (t.kind == Tok::Word && (t.text == "true" || t.text == "false")) {
      next();
      return rdf::Term::typed_literal(t.text, "http://www.w3.org/2001/XMLSchema#boolean");
    }
    if (t.kind == Tok::Word) unsupported(t, "function calls in comparisons");
    fail(t, "expected a constant in filter");
  }

  FilterExpr builtin() {
    const Token& name = next();
    std::string fn = upper(name.text);
    if (fn != "ISIRI" && fn != "ISURI" && fn != "ISLITERAL") {
      unsupported(name, "filter function " + name.text);
    }
    expect_punct("(");
    const Token& v = next();
    if (v.kind != Tok::Var) fail(v, name.text + " expects a variable");
    expect_punct(")");
    if (fn == "ISLITERAL") return IsLiteral{v.text};
    return IsIri{v.text};
  }

  void check(const Query& q) const {
    for (const GraphPattern& b : q.branches) {
      if (b.required.empty()) throw ParseError(1, "graph pattern without required triple patterns");
      auto vars = variables(b);
      for (const FilterExpr& f : b.filters) {
        if (std::find(vars.begin(), vars.end(), filter_var(f)) == vars.end()) {
          throw ParseError(1, "filter variable ?" + filter_var(f) +
                                  " does not occur in any triple pattern");
        }
      }
      for (const auto& v : q.projection) {
        if (std::find(vars.begin(), vars.end(), v) == vars.end()) {
          throw ParseError(1, "projected variable ?" + v + " does not occur in every branch");
        }
      }
    }
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::map<std::string, std::string> prefixes_;
};

}  // namespace

Query parse_sparql(std::string_view text) { return Parser(text).parse(); }

}  // namespace partout::sparql
