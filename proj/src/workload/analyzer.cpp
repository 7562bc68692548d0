#include "partout/workload/analyzer.hpp"

#include <ostream>
#include <set>
#include <stdexcept>

namespace partout::workload {

namespace {

void count(std::map<rdf::Term, std::uint64_t>& into, const sparql::PatternTerm& t, std::uint64_t n) {
  if (!sparql::is_variable(t)) into[sparql::constant(t)] += n;
}

template <typename Fn>
void for_each_pattern(const sparql::Query& q, Fn&& fn) {
  for (const auto& b : q.branches) {
    for (const auto& p : b.required) fn(p);
    for (const auto& p : b.optional) fn(p);
  }
}

bool shares_variable(const sparql::TriplePattern& a, const sparql::TriplePattern& b) {
  auto va = sparql::variables(std::vector<sparql::TriplePattern>{a});
  auto vb = sparql::variables(std::vector<sparql::TriplePattern>{b});
  for (const auto& v : va) {
    for (const auto& w : vb) {
      if (v == w) return true;
    }
  }
  return false;
}

}  // namespace

std::uint64_t total_queries(const QueryLog& log) {
  std::uint64_t total = 0;
  for (const auto& e : log) total += e.multiplicity;
  return total;
}

ConstantFrequencies constant_frequencies(const QueryLog& log) {
  ConstantFrequencies out;
  for (const auto& e : log) {
    for_each_pattern(e.query, [&](const sparql::TriplePattern& p) {
      count(out.subject_object, p.s, e.multiplicity);
      count(out.property, p.p, e.multiplicity);
      count(out.subject_object, p.o, e.multiplicity);
    });
  }
  return out;
}

AnonPattern anonymize(const sparql::TriplePattern& pattern) {
  auto anon = [](const sparql::PatternTerm& t) -> std::optional<rdf::Term> {
    if (sparql::is_variable(t)) return std::nullopt;
    return sparql::constant(t);
  };
  return {anon(pattern.s), anon(pattern.p), anon(pattern.o)};
}

std::string to_string(const AnonPattern& pattern) {
  auto text = [](const std::optional<rdf::Term>& t) {
    return t ? rdf::to_ntriples(*t) : std::string("Ω");
  };
  return "(" + text(pattern.s) + ", " + text(pattern.p) + ", " + text(pattern.o) + ")";
}

QueryLog normalize(const QueryLog& log, std::uint64_t theta) {
  if (theta < 1) throw std::invalid_argument("normalization threshold must be at least 1");
  auto freq = constant_frequencies(log);
  QueryLog out = log;
  std::size_t fresh = 0;
  auto replace = [&](sparql::PatternTerm& t) {
    if (sparql::is_variable(t)) return;
    auto it = freq.subject_object.find(sparql::constant(t));
    if (it != freq.subject_object.end() && it->second < theta) {
      // '#' cannot occur in parsed variable names, so this never collides.
      t = sparql::Variable{"#n" + std::to_string(fresh++)};
    }
  };
  for (auto& e : out) {
    for (auto& b : e.query.branches) {
      for (auto* list : {&b.required, &b.optional}) {
        for (auto& p : *list) {
          replace(p.s);
          replace(p.o);
        }
      }
    }
  }
  return out;
}

PatternFrequencies normalize_and_anonymize(const QueryLog& log, std::uint64_t theta) {
  PatternFrequencies phi;
  for (const auto& e : normalize(log, theta)) {
    std::set<AnonPattern> seen;
    for_each_pattern(e.query, [&](const sparql::TriplePattern& p) { seen.insert(anonymize(p)); });
    for (const auto& a : seen) phi[a] += e.multiplicity;
  }
  return phi;
}

std::uint64_t GlobalQueryGraph::weight(const AnonPattern& a, const AnonPattern& b) const {
  auto key = a <= b ? PatternEdge{a, b} : PatternEdge{b, a};
  auto it = edges.find(key);
  return it == edges.end() ? 0 : it->second;
}

void GlobalQueryGraph::write(std::ostream& out) const {
  for (const auto& [edge, w] : edges) {
    out << to_string(edge.first) << '\t' << to_string(edge.second) << '\t' << w << '\n';
  }
}

GlobalQueryGraph build_global_query_graph(const QueryLog& log, std::uint64_t theta) {
  GlobalQueryGraph g;
  g.nodes = normalize_and_anonymize(log, theta);
  for (const auto& e : normalize(log, theta)) {
    std::set<PatternEdge> witnessed;
    for (const auto& b : e.query.branches) {
      std::vector<sparql::TriplePattern> all = b.required;
      all.insert(all.end(), b.optional.begin(), b.optional.end());
      for (std::size_t i = 0; i < all.size(); ++i) {
        for (std::size_t j = i + 1; j < all.size(); ++j) {
          if (!shares_variable(all[i], all[j])) continue;
          auto a = anonymize(all[i]);
          auto c = anonymize(all[j]);
          witnessed.insert(a <= c ? PatternEdge{a, c} : PatternEdge{c, a});
        }
      }
    }
    for (const auto& edge : witnessed) g.edges[edge] += e.multiplicity;
  }
  return g;
}

}  // namespace partout::workload
