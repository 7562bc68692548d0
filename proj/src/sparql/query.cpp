#include "partout/sparql/query.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "partout/error.hpp"

namespace partout::sparql {

const std::string& filter_var(const FilterExpr& f) {
  return std::visit([](const auto& e) -> const std::string& { return e.var; }, f);
}

bool evaluate(const FilterExpr& f, const rdf::Term& value) {
  if (const auto* c = std::get_if<Compare>(&f)) return rdf::compare(value, c->op, c->constant);
  if (std::holds_alternative<IsIri>(f)) return value.is_iri();
  return value.is_literal();
}

namespace {

void add_var(std::vector<std::string>& out, const PatternTerm& t) {
  if (!is_variable(t)) return;
  const auto& name = var_name(t);
  if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
}

std::string term_text(const PatternTerm& t) {
  if (is_variable(t)) return "?" + var_name(t);
  const rdf::Term& c = constant(t);
  if (c.is_iri()) return "<" + c.lexical + ">";
  return c.lexical;
}

std::string filter_text(const FilterExpr& f) {
  if (const auto* c = std::get_if<Compare>(&f)) {
    return "FILTER(?" + c->var + " " + std::string(rdf::op_symbol(c->op)) + " " +
           term_text(c->constant) + ")";
  }
  if (const auto* i = std::get_if<IsIri>(&f)) return "FILTER(isIRI(?" + i->var + "))";
  return "FILTER(isLiteral(?" + std::get<IsLiteral>(f).var + "))";
}

void render_branch(std::ostringstream& out, const GraphPattern& b, const std::string& indent) {
  for (const auto& p : b.required) out << indent << render(p) << '\n';
  if (!b.optional.empty()) {
    out << indent << "OPTIONAL {\n";
    for (const auto& p : b.optional) out << indent << "  " << render(p) << '\n';
    out << indent << "}\n";
  }
  for (const auto& f : b.filters) out << indent << filter_text(f) << '\n';
}

// Union-find over pattern indexes connected by shared variables.
bool connected(const std::vector<TriplePattern>& patterns) {
  std::vector<std::size_t> parent(patterns.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    auto vi = variables(std::vector<TriplePattern>{patterns[i]});
    for (std::size_t j = i + 1; j < patterns.size(); ++j) {
      auto vj = variables(std::vector<TriplePattern>{patterns[j]});
      bool shares = std::any_of(vi.begin(), vi.end(), [&](const std::string& v) {
        return std::find(vj.begin(), vj.end(), v) != vj.end();
      });
      if (shares) parent[find(i)] = find(j);
    }
  }
  for (std::size_t i = 1; i < patterns.size(); ++i) {
    if (find(i) != find(0)) return false;
  }
  return true;
}

}  // namespace

std::vector<std::string> variables(const std::vector<TriplePattern>& patterns) {
  std::vector<std::string> out;
  for (const auto& p : patterns) {
    add_var(out, p.s);
    add_var(out, p.p);
    add_var(out, p.o);
  }
  return out;
}

std::vector<std::string> variables(const GraphPattern& branch) {
  std::vector<TriplePattern> all = branch.required;
  all.insert(all.end(), branch.optional.begin(), branch.optional.end());
  return variables(all);
}

std::vector<std::string> output_variables(const Query& query) {
  if (!query.select_all) return query.projection;
  std::vector<std::string> out;
  for (const auto& b : query.branches) {
    for (auto& v : variables(b)) {
      if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(std::move(v));
    }
  }
  return out;
}

std::string render(const FilterExpr& filter) {
  return filter_text(filter);
}

std::string render(const TriplePattern& pattern) {
  return term_text(pattern.s) + " " + term_text(pattern.p) + " " + term_text(pattern.o) + " .";
}

std::string render(const Query& query) {
  std::ostringstream out;
  out << "SELECT";
  if (query.select_all) {
    out << " *";
  } else {
    for (const auto& v : query.projection) out << " ?" << v;
  }
  out << " WHERE {\n";
  if (query.branches.size() == 1) {
    render_branch(out, query.branches.front(), "  ");
  } else {
    for (std::size_t i = 0; i < query.branches.size(); ++i) {
      out << (i == 0 ? "  {\n" : "  UNION {\n");
      render_branch(out, query.branches[i], "    ");
      out << "  }\n";
    }
  }
  out << "}\n";
  return out.str();
}

std::optional<std::string> validate_executable(const Query& query) {
  for (const auto& b : query.branches) {
    if (!b.optional.empty()) return "OPTIONAL execution";
  }
  for (const auto& b : query.branches) {
    if (!connected(b.required)) return "disconnected join graph (cross product)";
  }
  return std::nullopt;
}

std::vector<LogEntry> parse_query_log(std::istream& in) {
  std::vector<LogEntry> log;
  std::string line;
  std::size_t line_no = 0;
  std::string text;
  std::size_t first_line = 1;
  std::uint64_t multiplicity = 1;
  bool seen_content = false;

  auto flush = [&]() {
    if (!seen_content) {
      text.clear();
      multiplicity = 1;
      return;
    }
    try {
      log.push_back({parse_sparql(text), multiplicity});
    } catch (const ParseError& e) {
      throw ParseError(first_line + e.line() - 1, e.reason());
    }
    text.clear();
    multiplicity = 1;
    seen_content = false;
  };

  while (std::getline(in, line)) {
    ++line_no;
    std::string_view trimmed = line;
    while (!trimmed.empty() && (trimmed.back() == '\r' || trimmed.back() == ' ' || trimmed.back() == '\t')) {
      trimmed.remove_suffix(1);
    }
    if (trimmed == "###") {
      flush();
      continue;
    }
    if (!seen_content && trimmed.starts_with("#x")) {
      std::string_view rest = trimmed.substr(2);
      while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
      std::uint64_t n = 0;
      auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), n);
      if (ec != std::errc() || ptr != rest.data() + rest.size() || n == 0) {
        throw ParseError(line_no, "bad multiplicity line '" + std::string(trimmed) + "'");
      }
      multiplicity = n;
      continue;
    }
    if (!seen_content) {
      bool blank = trimmed.find_first_not_of(" \t") == std::string_view::npos;
      if (blank) continue;
      seen_content = true;
      first_line = line_no;
    }
    text += line;
    text += '\n';
  }
  flush();
  return log;
}

void write_query_log(std::ostream& out, const std::vector<LogEntry>& log) {
  for (std::size_t i = 0; i < log.size(); ++i) {
    if (i > 0) out << "###\n";
    if (log[i].multiplicity != 1) out << "#x " << log[i].multiplicity << '\n';
    out << render(log[i].query);
  }
}

}  // namespace partout::sparql
