#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "partout/error.hpp"
#include "partout/plan/plan.hpp"

namespace partout::plan {

using nlohmann::json;

namespace {

constexpr std::string_view kKindNames[] = {"IndexScan", "Project", "MergeJoin", "HashJoin",
                                           "BMU",       "Sort",    "Union",     "Empty",
                                           "Fetch"};

OpKind kind_from(const std::string& name) {
  for (std::size_t i = 0; i < std::size(kKindNames); ++i) {
    if (kKindNames[i] == name) return static_cast<OpKind>(i);
  }
  throw FormatError("unknown operator kind '" + name + "'");
}

std::string term_json(const sparql::PatternTerm& t) {
  if (sparql::is_variable(t)) return "?" + sparql::var_name(t);
  return rdf::to_ntriples(sparql::constant(t));
}

sparql::PatternTerm term_from(const std::string& s) {
  if (s.starts_with("?")) return sparql::Variable{s.substr(1)};
  return rdf::from_ntriples(s);
}

json filter_json(const sparql::FilterExpr& f) {
  if (const auto* c = std::get_if<sparql::Compare>(&f)) {
    return {{"var", c->var}, {"op", std::string(rdf::op_symbol(c->op))}, {"constant", rdf::to_ntriples(c->constant)}};
  }
  if (const auto* i = std::get_if<sparql::IsIri>(&f)) return {{"var", i->var}, {"func", "isIRI"}};
  return {{"var", sparql::filter_var(f)}, {"func", "isLiteral"}};
}

sparql::FilterExpr filter_from(const json& j) {
  auto var = j.at("var").get<std::string>();
  if (j.contains("func")) {
    if (j.at("func") == "isIRI") return sparql::IsIri{var};
    if (j.at("func") == "isLiteral") return sparql::IsLiteral{var};
    throw FormatError("unknown filter function " + j.at("func").dump());
  }
  auto op_text = j.at("op").get<std::string>();
  for (int i = 0; i < 5; ++i) {
    auto op = static_cast<rdf::CompareOp>(i);
    if (rdf::op_symbol(op) == op_text) {
      return sparql::Compare{var, op, rdf::from_ntriples(j.at("constant").get<std::string>())};
    }
  }
  throw FormatError("unknown comparison '" + op_text + "'");
}

std::string vars_text(const std::vector<std::string>& vars) {
  std::string out;
  for (const auto& v : vars) out += " ?" + v;
  return out;
}

void explain_into(std::ostringstream& out, const PlanOp& op, int depth) {
  out << std::string(2 * depth, ' ') << kind_name(op.kind);
  switch (op.kind) {
    case OpKind::IndexScan: {
      out << ' ' << rdf::order_name(op.order) << " (" << term_json(op.pattern.s) << ' '
          << term_json(op.pattern.p) << ' ' << term_json(op.pattern.o) << ')';
      for (const auto& f : op.filters) out << ' ' << sparql::render(f);
      out << " fragments={" << fmt::format("{}", fmt::join(op.fragments, ",")) << '}';
      break;
    }
    case OpKind::Project:
    case OpKind::MergeJoin:
    case OpKind::HashJoin:
    case OpKind::Sort:
      out << vars_text(op.vars);
      break;
    case OpKind::Fetch:
      out << " exchange=" << op.exchange;
      break;
    default:
      break;
  }
  out << fmt::format(" [hh={} excard={:.0f} xc={:.0f}]\n", op.hh, op.excard, op.xc);
  for (const auto& c : op.children) explain_into(out, c, depth + 1);
}

}  // namespace

std::string_view kind_name(OpKind kind) {
  return kKindNames[static_cast<std::size_t>(kind)];
}

double transfer_cost(const PlanOp& child, const PlanOp& parent, const CostModel& model) {
  if (child.hh == kNoHost || parent.hh == kNoHost) {
    throw PlanError(fmt::format("{} operator without home host", kind_name(child.hh == kNoHost ? child.kind : parent.kind)));
  }
  if (child.hh == parent.hh) return 0;
  return model.t_page * std::ceil(child.excard / kPageTuples);
}

double execution_cost(const PlanOp& op, const CostModel& m) {
  switch (op.kind) {
    case OpKind::IndexScan:
      return m.c_scan * op.excard + m.c_host_scan * op.host_triples;
    case OpKind::MergeJoin:
    case OpKind::BMU: {
      double in = 0;
      for (const auto& c : op.children) in += c.excard;
      return m.c_cmp * in + m.c_out * op.excard;
    }
    case OpKind::HashJoin:
      return m.c_build * op.children.at(0).excard + m.c_probe * op.children.at(1).excard + m.c_out * op.excard;
    case OpKind::Sort: {
      double n = op.excard;
      return m.c_cmp * n * std::ceil(std::log2(n + 1));
    }
    case OpKind::Project:
    case OpKind::Union:
      return m.c_out * op.excard;
    case OpKind::Empty:
    case OpKind::Fetch:
      return 0;
  }
  return 0;
}

double cost(const PlanOp& op, const CostModel& model) {
  double worst = 0;
  for (const auto& c : op.children) worst = std::max(worst, transfer_cost(c, op, model) + cost(c, model));
  return execution_cost(op, model) + worst;
}

double local_cost(const PlanOp& op, const CostModel& model) {
  double worst = 0;
  for (const auto& c : op.children) worst = std::max(worst, local_cost(c, model));
  return execution_cost(op, model) + worst;
}

std::string explain(const PlanOp& plan) {
  std::ostringstream out;
  explain_into(out, plan, 0);
  return out.str();
}

double join_cardinality(const PlanOp& left, const PlanOp& right, const std::vector<std::string>& vars) {
  if (left.excard <= 0 || right.excard <= 0) return 0;
  double out = left.excard * right.excard;
  for (const auto& v : vars) {
    auto d = [&](const PlanOp& side) {
      auto it = side.distinct.find(v);
      return it == side.distinct.end() ? side.excard : it->second;
    };
    out /= std::max(1.0, std::max(d(left), d(right)));
  }
  return out;
}

json to_json(const PlanOp& op) {
  json j{{"kind", std::string(kind_name(op.kind))},
         {"vars", op.vars},
         {"columns", op.columns},
         {"sorted_by", op.sorted_by},
         {"hh", op.hh},
         {"excard", op.excard},
         {"xc", op.xc},
         {"distinct", op.distinct}};
  if (op.kind == OpKind::IndexScan) {
    j["pattern"] = {term_json(op.pattern.s), term_json(op.pattern.p), term_json(op.pattern.o)};
    j["order"] = std::string(rdf::order_name(op.order));
    j["fragments"] = op.fragments;
    json filters = json::array();
    for (const auto& f : op.filters) filters.push_back(filter_json(f));
    j["filters"] = filters;
    j["host_triples"] = op.host_triples;
  }
  if (op.kind == OpKind::Fetch) j["exchange"] = op.exchange;
  json children = json::array();
  for (const auto& c : op.children) children.push_back(to_json(c));
  j["children"] = children;
  return j;
}

PlanOp plan_from_json(const json& j) {
  try {
    PlanOp op;
    op.kind = kind_from(j.at("kind").get<std::string>());
    op.vars = j.at("vars").get<std::vector<std::string>>();
    op.columns = j.at("columns").get<std::vector<std::string>>();
    op.sorted_by = j.at("sorted_by").get<std::vector<std::string>>();
    op.hh = j.at("hh").get<std::int32_t>();
    op.excard = j.at("excard").get<double>();
    op.xc = j.at("xc").get<double>();
    op.distinct = j.at("distinct").get<std::map<std::string, double>>();
    if (op.kind == OpKind::IndexScan) {
      const auto& p = j.at("pattern");
      op.pattern = {term_from(p.at(0).get<std::string>()), term_from(p.at(1).get<std::string>()),
                    term_from(p.at(2).get<std::string>())};
      auto order = rdf::order_from_name(j.at("order").get<std::string>());
      if (!order) throw FormatError("unknown index order " + j.at("order").dump());
      op.order = *order;
      op.fragments = j.at("fragments").get<std::vector<std::uint32_t>>();
      for (const auto& f : j.at("filters")) op.filters.push_back(filter_from(f));
      op.host_triples = j.at("host_triples").get<double>();
    }
    if (op.kind == OpKind::Fetch) op.exchange = j.at("exchange").get<std::uint32_t>();
    for (const auto& c : j.at("children")) op.children.push_back(plan_from_json(c));
    return op;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed plan: ") + e.what());
  }
}

}  // namespace partout::plan
