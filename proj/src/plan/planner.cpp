#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>

#include <fmt/format.h>

#include "partout/error.hpp"
#include "partout/plan/plan.hpp"

namespace partout::plan {

namespace {

using sparql::TriplePattern;

constexpr rdf::Component kPositions[] = {rdf::Component::Subject, rdf::Component::Property,
                                         rdf::Component::Object};

const sparql::PatternTerm& at(const TriplePattern& p, rdf::Component c) {
  switch (c) {
    case rdf::Component::Subject: return p.s;
    case rdf::Component::Property: return p.p;
    case rdf::Component::Object: return p.o;
  }
  return p.s;
}

bool contains(const std::vector<std::string>& v, const std::string& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

std::vector<std::string> shared_vars(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::string> out;
  for (const auto& v : a) {
    if (contains(b, v)) out.push_back(v);
  }
  return out;
}

std::vector<std::string> merged_columns(const PlanOp& a, const PlanOp& b) {
  auto out = a.columns;
  for (const auto& c : b.columns) {
    if (!contains(out, c)) out.push_back(c);
  }
  return out;
}

/// Variables in the order a scan in `order` delivers them sorted.
std::vector<std::string> scan_order_vars(const TriplePattern& p, rdf::IndexOrder order) {
  std::vector<std::string> out;
  for (auto c : rdf::components(order)) {
    const auto& t = at(p, c);
    if (sparql::is_variable(t) && !contains(out, sparql::var_name(t))) out.push_back(sparql::var_name(t));
  }
  return out;
}

rdf::IdPattern bound_shape(const TriplePattern& p) {
  rdf::IdPattern ip;
  if (!sparql::is_variable(p.s)) ip.s = 1;
  if (!sparql::is_variable(p.p)) ip.p = 1;
  if (!sparql::is_variable(p.o)) ip.o = 1;
  return ip;
}

double filter_selectivity(const std::vector<sparql::FilterExpr>& filters) {
  double s = 1;
  for (const auto& f : filters) {
    s *= std::holds_alternative<sparql::Compare>(f) ? kCompareSelectivity : kFuncSelectivity;
  }
  return s;
}

std::string first_key(const PlanOp& op) {
  return op.sorted_by.empty() ? std::string() : op.sorted_by.front();
}

/// Distinct estimates of a join result.
std::map<std::string, double> joined_distinct(const PlanOp& a, const PlanOp& b, double excard) {
  std::map<std::string, double> out;
  for (const auto* side : {&a, &b}) {
    for (const auto& [v, d] : side->distinct) {
      auto it = out.find(v);
      out[v] = it == out.end() ? d : std::min(it->second, d);
    }
  }
  for (auto& [v, d] : out) d = std::min(d, excard);
  return out;
}

PlanOp make_join(OpKind kind, PlanOp first, PlanOp second, std::vector<std::string> vars, double excard,
                 std::map<std::string, double> distinct, const CostModel& model) {
  PlanOp op;
  op.kind = kind;
  op.columns = merged_columns(first, second);
  op.vars = std::move(vars);
  op.sorted_by = kind == OpKind::MergeJoin ? std::vector<std::string>{op.vars.front()} : second.sorted_by;
  op.excard = excard;
  op.distinct = std::move(distinct);
  op.children.push_back(std::move(first));
  op.children.push_back(std::move(second));
  op.xc = execution_cost(op, model);
  return op;
}

PlanOp make_bmu_chain(std::vector<PlanOp> parts, std::int32_t hh, const CostModel& model) {
  PlanOp acc = std::move(parts.front());
  for (std::size_t i = 1; i < parts.size(); ++i) {
    PlanOp bmu;
    bmu.kind = OpKind::BMU;
    bmu.columns = acc.columns;
    bmu.sorted_by = acc.sorted_by;
    bmu.distinct = acc.distinct;
    bmu.excard = acc.excard + parts[i].excard;
    for (const auto& [v, d] : parts[i].distinct) bmu.distinct[v] = std::min(bmu.excard, bmu.distinct[v] + d);
    bmu.hh = hh;
    bmu.children.push_back(std::move(acc));
    bmu.children.push_back(std::move(parts[i]));
    bmu.xc = execution_cost(bmu, model);
    acc = std::move(bmu);
  }
  return acc;
}

/// Keeps the longest prefix of the sort order still present in the columns.
void trim_order(PlanOp& op) {
  std::size_t keep = 0;
  while (keep < op.sorted_by.size() && contains(op.columns, op.sorted_by[keep])) ++keep;
  op.sorted_by.resize(keep);
}

void prune(PlanOp& op, const std::set<std::string>& needed) {
  auto keep_needed = [&](std::vector<std::string> cols) {
    std::vector<std::string> out;
    for (auto& c : cols) {
      if (needed.contains(c)) out.push_back(std::move(c));
    }
    return out;
  };
  switch (op.kind) {
    case OpKind::IndexScan:
      op.columns = keep_needed(sparql::variables(std::vector<TriplePattern>{op.pattern}));
      break;
    case OpKind::MergeJoin:
    case OpKind::HashJoin: {
      auto below = needed;
      below.insert(op.vars.begin(), op.vars.end());
      for (auto& c : op.children) prune(c, below);
      op.columns = keep_needed(merged_columns(op.children[0], op.children[1]));
      break;
    }
    case OpKind::Sort:
    case OpKind::BMU: {
      auto below = needed;
      below.insert(op.vars.begin(), op.vars.end());
      for (auto& c : op.children) prune(c, below);
      op.columns = op.children.front().columns;
      break;
    }
    case OpKind::Project:
      for (auto& c : op.children) prune(c, std::set<std::string>(op.vars.begin(), op.vars.end()));
      op.columns = op.vars;
      break;
    case OpKind::Union:
      for (auto& c : op.children) prune(c, needed);
      break;
    case OpKind::Empty:
    case OpKind::Fetch:
      break;
  }
  trim_order(op);
}

bool is_empty_op(const PlanOp& op) { return op.kind == OpKind::Empty; }

PlanOp empty_like(const PlanOp& op) {
  PlanOp e;
  e.kind = OpKind::Empty;
  e.columns = op.columns;
  e.hh = op.hh;
  return e;
}

/// Replaces subtrees that can produce nothing by Empty.
void collapse_empty(PlanOp& op) {
  for (auto& c : op.children) collapse_empty(c);
  switch (op.kind) {
    case OpKind::MergeJoin:
    case OpKind::HashJoin:
    case OpKind::Sort:
    case OpKind::Project:
      if (std::any_of(op.children.begin(), op.children.end(), is_empty_op)) op = empty_like(op);
      break;
    case OpKind::BMU:
    case OpKind::Union: {
      std::erase_if(op.children, is_empty_op);
      if (op.children.empty()) {
        op = empty_like(op);
      } else if (op.children.size() == 1 && op.kind == OpKind::BMU) {
        op = std::move(op.children.front());
      }
      break;
    }
    default:
      break;
  }
}

void chain_units(const PlanOp& op, std::vector<const PlanOp*>& out) {
  if (op.kind == OpKind::BMU) {
    for (const auto& c : op.children) chain_units(c, out);
  } else {
    out.push_back(&op);
  }
}

/// Cheapest subtree cost per home host; infinity where the host is not allowed.
/// Scans keep their host and BMU chains share the host of their parent.
using HostCosts = std::vector<double>;

constexpr double kInf = std::numeric_limits<double>::infinity();

double page_cost(const PlanOp& child, const CostModel& model) {
  return model.t_page * std::ceil(child.excard / kPageTuples);
}

HostCosts host_costs(const PlanOp& op, std::uint32_t hosts, const CostModel& model,
                     std::map<const PlanOp*, HostCosts>& memo) {
  if (auto it = memo.find(&op); it != memo.end()) return it->second;
  HostCosts out(hosts, kInf);
  double xc = execution_cost(op, model);
  if (op.kind == OpKind::IndexScan && op.hh != kNoHost) {
    out.at(static_cast<std::size_t>(op.hh)) = xc;
  } else {
    std::vector<HostCosts> tables;
    for (const auto& c : op.children) tables.push_back(host_costs(c, hosts, model, memo));
    for (std::uint32_t h = 0; h < hosts; ++h) {
      double worst = 0;
      for (std::size_t i = 0; i < op.children.size(); ++i) {
        const auto& t = tables[i];
        double best = t[h];
        if (op.children[i].kind != OpKind::BMU) {
          for (std::uint32_t hc = 0; hc < hosts; ++hc) {
            if (hc != h) best = std::min(best, t[hc] + page_cost(op.children[i], model));
          }
        }
        worst = std::max(worst, best);
      }
      out[h] = xc + worst;
    }
  }
  memo[&op] = out;
  return out;
}

void fix_hosts(PlanOp& op, std::int32_t h, std::uint32_t hosts, const CostModel& model,
               std::map<const PlanOp*, HostCosts>& memo) {
  if (op.kind == OpKind::IndexScan && op.hh != kNoHost) return;
  op.hh = h;
  for (auto& c : op.children) {
    const auto& t = memo.at(&c);
    std::int32_t pick = h;
    if (c.kind != OpKind::BMU) {
      double best = t[static_cast<std::size_t>(h)];
      for (std::uint32_t hc = 0; hc < hosts; ++hc) {
        double v = static_cast<std::int32_t>(hc) == h ? t[hc] : t[hc] + page_cost(c, model);
        if (v < best) {
          best = v;
          pick = static_cast<std::int32_t>(hc);
        }
      }
    }
    fix_hosts(c, pick, hosts, model, memo);
  }
}

using Path = std::vector<std::size_t>;

void collect_paths(const PlanOp& op, Path& path, std::vector<Path>& out, OpKind kind) {
  for (std::size_t i = 0; i < op.children.size(); ++i) {
    path.push_back(i);
    collect_paths(op.children[i], path, out, kind);
    path.pop_back();
  }
  if (op.kind == kind) out.push_back(path);
}

PlanOp& node_at(PlanOp& root, const Path& path) {
  PlanOp* op = &root;
  for (auto i : path) op = &op->children.at(i);
  return *op;
}

/// Per-pair partial MergeJoins of a join with a BMU-chain input, or nullopt
/// when the join does not qualify.
std::optional<PlanOp> partial_join_rewrite(const PlanOp& join, const CostModel& model) {
  if (join.kind != OpKind::MergeJoin || join.children.size() != 2) return std::nullopt;
  std::size_t chain_side;
  if (join.children[0].kind == OpKind::BMU) {
    chain_side = 0;
  } else if (join.children[1].kind == OpKind::BMU) {
    chain_side = 1;
  } else {
    return std::nullopt;
  }
  std::vector<const PlanOp*> a_units, b_units;
  chain_units(join.children[chain_side], a_units);
  chain_units(join.children[1 - chain_side], b_units);
  for (const auto* b : b_units) {
    if (b->kind != OpKind::IndexScan) return std::nullopt;
  }
  std::vector<PlanOp> partials;
  for (const auto* a : a_units) {
    for (const auto* b : b_units) {
      const PlanOp& left = chain_side == 0 ? *a : *b;
      const PlanOp& right = chain_side == 0 ? *b : *a;
      double est = join_cardinality(left, right, join.vars);
      if (a->excard <= 0 || b->excard <= 0) continue;
      auto p = make_join(OpKind::MergeJoin, left, right, join.vars, est, joined_distinct(left, right, est), model);
      p.columns = join.columns;
      p.sorted_by = join.sorted_by;
      p.hh = a->hh;
      partials.push_back(std::move(p));
    }
  }
  if (partials.empty()) return empty_like(join);
  std::int32_t chain_host = b_units.size() == 1 ? b_units.front()->hh : join.hh;
  return make_bmu_chain(std::move(partials), chain_host, model);
}

std::optional<PlanOp> hash_to_merge_rewrite(const PlanOp& join, const std::string& var,
                                            const CostModel& model) {
  PlanOp out = join;
  out.kind = OpKind::MergeJoin;
  out.vars = {var};
  for (const auto& v : join.vars) {
    if (v != var) out.vars.push_back(v);
  }
  out.sorted_by = {var};
  for (auto& c : out.children) {
    if (first_key(c) == var) continue;
    PlanOp sort;
    sort.kind = OpKind::Sort;
    sort.vars = {var};
    sort.columns = c.columns;
    sort.sorted_by = {var};
    sort.excard = c.excard;
    sort.distinct = c.distinct;
    sort.hh = c.hh;
    sort.children.push_back(std::move(c));
    sort.xc = execution_cost(sort, model);
    c = std::move(sort);
  }
  out.xc = execution_cost(out, model);
  return out;
}

}  // namespace

Planner::Planner(const alloc::Catalog& catalog, const rdf::Dictionary& dict)
    : catalog_(catalog), dict_(dict) {}

std::vector<std::uint32_t> Planner::relevant_fragments(const TriplePattern& pattern) const {
  workload::AnonPattern anon;
  for (auto c : kPositions) {
    const auto& t = at(pattern, c);
    if (sparql::is_variable(t)) continue;
    if (!dict_.find(sparql::constant(t))) return {};
    std::optional<rdf::Term>& slot =
        c == rdf::Component::Subject ? anon.s : (c == rdf::Component::Property ? anon.p : anon.o);
    slot = sparql::constant(t);
  }
  return catalog_.fragmentation.relevant_fragments(anon, catalog_.stray_masks());
}

double Planner::estimate(const TriplePattern& pattern, const std::vector<sparql::FilterExpr>& filters,
                         std::uint32_t fragment) const {
  std::optional<rdf::TermId> ids[3];
  for (int i = 0; i < 3; ++i) {
    const auto& t = at(pattern, kPositions[i]);
    if (sparql::is_variable(t)) continue;
    auto id = dict_.find(sparql::constant(t));
    if (!id) return 0;
    ids[i] = *id;
  }
  const auto& [s, p, o] = ids;
  double n;
  auto found = catalog_.stats.find(fragment);
  if (found == catalog_.stats.end()) {
    // Size-only catalog: a tenth per bound position.
    n = static_cast<double>(catalog_.fragmentation.fragment(fragment).size);
    for (const auto& id : ids) {
      if (id) n /= 10;
    }
    return n * filter_selectivity(filters);
  }
  const auto& st = found->second;
  auto get = [](const auto& m, const auto& k) -> double {
    auto it = m.find(k);
    return it == m.end() ? 0.0 : static_cast<double>(it->second);
  };
  if (p) {
    double pc = get(st.property_counts, *p);
    if (pc == 0) return 0;
    if (o) {
      auto po = st.po_counts.find({*p, *o});
      if (po != st.po_counts.end()) {
        n = static_cast<double>(po->second);
      } else if (!st.po_truncated) {
        return 0;
      } else {
        double known = 0, known_objects = 0;
        for (auto it = st.po_counts.lower_bound({*p, 0}); it != st.po_counts.end() && it->first.first == *p; ++it) {
          known += static_cast<double>(it->second);
          ++known_objects;
        }
        double rest_objects = get(st.property_objects, *p) - known_objects;
        n = std::max(0.0, pc - known) / std::max(1.0, rest_objects);
      }
      if (s) n = std::min(1.0, n / std::max(1.0, get(st.property_subjects, *p)));
    } else {
      n = pc;
      if (s) n /= std::max(1.0, get(st.property_subjects, *p));
    }
  } else {
    n = static_cast<double>(st.triples);
    if (s) n /= std::max<double>(1, static_cast<double>(st.distinct_s));
    if (o) n /= std::max<double>(1, static_cast<double>(st.distinct_o));
  }
  return n * filter_selectivity(filters);
}

PlanOp Planner::scan(const TriplePattern& pattern, rdf::IndexOrder order,
                     const std::vector<sparql::FilterExpr>& filters) const {
  PlanOp op;
  op.kind = OpKind::IndexScan;
  op.pattern = pattern;
  op.order = order;
  op.filters = filters;
  op.fragments = relevant_fragments(pattern);
  op.columns = sparql::variables(std::vector<TriplePattern>{pattern});
  op.sorted_by = scan_order_vars(pattern, order);
  for (auto f : op.fragments) op.excard += estimate(pattern, filters, f);

  std::optional<rdf::TermId> p;
  if (!sparql::is_variable(pattern.p)) p = dict_.lookup(sparql::constant(pattern.p));
  for (auto c : kPositions) {
    const auto& t = at(pattern, c);
    if (!sparql::is_variable(t)) continue;
    double d = 0;
    for (auto f : op.fragments) {
      auto it = catalog_.stats.find(f);
      if (it == catalog_.stats.end()) {
        d += static_cast<double>(catalog_.fragmentation.fragment(f).size);
        continue;
      }
      const auto& st = it->second;
      auto get = [](const auto& m, rdf::TermId k) {
        auto i = m.find(k);
        return i == m.end() ? 0.0 : static_cast<double>(i->second);
      };
      if (c == rdf::Component::Subject) d += p ? get(st.property_subjects, *p) : static_cast<double>(st.distinct_s);
      if (c == rdf::Component::Object) d += p ? get(st.property_objects, *p) : static_cast<double>(st.distinct_o);
      if (c == rdf::Component::Property) d += static_cast<double>(st.distinct_p);
    }
    auto& slot = op.distinct[sparql::var_name(t)];
    slot = slot == 0 ? std::min(d, op.excard) : std::min(slot, d);
  }
  op.xc = execution_cost(op, catalog_.cost_model);
  return op;
}

PlanOp Planner::plan_branch(const sparql::GraphPattern& branch, const std::vector<std::string>& output) const {
  const auto& model = catalog_.cost_model;
  const auto& pats = branch.required;
  const std::size_t n = pats.size();
  if (n == 0) throw PlanError("branch without triple patterns");

  // Each filter goes to the first pattern mentioning its variable.
  std::vector<std::vector<sparql::FilterExpr>> leaf_filters(n);
  std::vector<std::vector<std::string>> pat_vars(n);
  for (std::size_t i = 0; i < n; ++i) pat_vars[i] = sparql::variables(std::vector<TriplePattern>{pats[i]});
  for (const auto& f : branch.filters) {
    for (std::size_t i = 0; i < n; ++i) {
      if (contains(pat_vars[i], sparql::filter_var(f))) {
        leaf_filters[i].push_back(f);
        break;
      }
    }
  }

  // Leaf candidates: one per distinct first sort variable, earliest order wins.
  std::vector<std::map<std::string, PlanOp>> leaves(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto shape = bound_shape(pats[i]);
    for (auto order : rdf::kAllOrders) {
      if (!rdf::order_compatible(shape, order)) continue;
      auto op = scan(pats[i], order, leaf_filters[i]);
      leaves[i].try_emplace(first_key(op), std::move(op));
    }
  }

  PlanOp body;
  if (n <= kDpPatternLimit) {
    struct Entry {
      PlanOp op;
      double cost;
    };
    std::vector<std::map<std::string, Entry>> best(std::size_t{1} << n);
    std::vector<std::vector<std::string>> subset_vars(std::size_t{1} << n);
    struct Est {
      double excard;
      std::map<std::string, double> distinct;
    };
    std::vector<std::optional<Est>> est(std::size_t{1} << n);
    auto offer = [](std::map<std::string, Entry>& table, PlanOp op, double c) {
      auto key = first_key(op);
      auto it = table.find(key);
      if (it == table.end() || c < it->second.cost) table.insert_or_assign(key, Entry{std::move(op), c});
    };
    for (std::size_t i = 0; i < n; ++i) {
      for (auto& [k, op] : leaves[i]) offer(best[std::size_t{1} << i], op, local_cost(op, model));
      subset_vars[std::size_t{1} << i] = pat_vars[i];
    }
    const std::size_t full = (std::size_t{1} << n) - 1;
    for (std::size_t S = 1; S <= full; ++S) {
      if (std::popcount(S) < 2) continue;
      for (std::size_t S1 = (S - 1) & S; S1 > 0; S1 = (S1 - 1) & S) {
        std::size_t S2 = S ^ S1;
        if (best[S1].empty() || best[S2].empty()) continue;
        auto shared = shared_vars(subset_vars[S1], subset_vars[S2]);
        if (shared.empty()) continue;
        if (subset_vars[S].empty()) {
          subset_vars[S] = subset_vars[S1];
          for (const auto& v : subset_vars[S2]) {
            if (!contains(subset_vars[S], v)) subset_vars[S].push_back(v);
          }
        }
        const PlanOp& any1 = best[S1].begin()->second.op;
        const PlanOp& any2 = best[S2].begin()->second.op;
        if (!est[S]) {
          // Canonical estimate: left-deep in pattern order, so every plan of S agrees.
          PlanOp acc = leaves[std::countr_zero(S)].begin()->second;
          std::size_t done = std::size_t{1} << std::countr_zero(S);
          while (done != S) {
            for (std::size_t i = 0; i < n; ++i) {
              std::size_t bit = std::size_t{1} << i;
              if (!(S & bit) || (done & bit)) continue;
              auto on = shared_vars(acc.columns, pat_vars[i]);
              if (on.empty()) continue;
              const PlanOp& leaf = leaves[i].begin()->second;
              double card = join_cardinality(acc, leaf, on);
              acc.distinct = joined_distinct(acc, leaf, card);
              acc.columns = merged_columns(acc, leaf);
              acc.excard = card;
              done |= bit;
              break;
            }
          }
          est[S] = Est{acc.excard, acc.distinct};
        }
        bool s1_builds = any1.excard < any2.excard || (any1.excard == any2.excard && S1 < S2);
        for (const auto& [k1, e1] : best[S1]) {
          for (const auto& [k2, e2] : best[S2]) {
            double child_cost = std::max(e1.cost, e2.cost);
            if (!k1.empty() && k1 == k2 && contains(shared, k1)) {
              std::vector<std::string> vars{k1};
              for (const auto& v : shared) {
                if (v != k1) vars.push_back(v);
              }
              auto op = make_join(OpKind::MergeJoin, e1.op, e2.op, vars, est[S]->excard, est[S]->distinct, model);
              double c = op.xc + child_cost;
              offer(best[S], std::move(op), c);
            }
            if (s1_builds) {
              auto op = make_join(OpKind::HashJoin, e1.op, e2.op, shared, est[S]->excard, est[S]->distinct, model);
              double c = op.xc + child_cost;
              offer(best[S], std::move(op), c);
            }
          }
        }
      }
    }
    if (best[full].empty()) throw PlanError("disconnected join graph (cross product)");
    const Entry* pick = nullptr;
    for (const auto& [k, e] : best[full]) {
      if (!pick || e.cost < pick->cost) pick = &e;
    }
    body = pick->op;
  } else {
    std::vector<bool> used(n, false);
    std::size_t start = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (leaves[i].begin()->second.excard < leaves[start].begin()->second.excard) start = i;
    }
    body = leaves[start].begin()->second;
    used[start] = true;
    for (std::size_t step = 1; step < n; ++step) {
      std::optional<std::size_t> next;
      double next_card = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (used[i] || shared_vars(body.columns, pat_vars[i]).empty()) continue;
        double card = join_cardinality(body, leaves[i].begin()->second, shared_vars(body.columns, pat_vars[i]));
        if (!next || card < next_card) {
          next = i;
          next_card = card;
        }
      }
      if (!next) throw PlanError("disconnected join graph (cross product)");
      used[*next] = true;
      auto shared = shared_vars(body.columns, pat_vars[*next]);
      auto key = first_key(body);
      const PlanOp& any = leaves[*next].begin()->second;
      auto distinct = joined_distinct(body, any, next_card);
      if (!key.empty() && contains(shared, key) && leaves[*next].contains(key)) {
        std::vector<std::string> vars{key};
        for (const auto& v : shared) {
          if (v != key) vars.push_back(v);
        }
        body = make_join(OpKind::MergeJoin, std::move(body), leaves[*next].at(key), vars, next_card, distinct, model);
      } else if (any.excard < body.excard) {
        body = make_join(OpKind::HashJoin, any, std::move(body), shared, next_card, distinct, model);
      } else {
        body = make_join(OpKind::HashJoin, std::move(body), any, shared, next_card, distinct, model);
      }
    }
  }

  PlanOp project;
  project.kind = OpKind::Project;
  project.vars = output;
  project.columns = output;
  project.excard = body.excard;
  project.distinct = body.distinct;
  project.children.push_back(std::move(body));
  project.xc = execution_cost(project, model);
  prune(project, {});
  return project;
}

PlanOp Planner::initial_plan(const sparql::Query& query) const {
  if (auto why = sparql::validate_executable(query)) throw PlanError("query not executable: " + *why);
  auto output = sparql::output_variables(query);
  if (query.branches.size() == 1) return plan_branch(query.branches.front(), output);
  PlanOp u;
  u.kind = OpKind::Union;
  u.columns = output;
  for (const auto& b : query.branches) {
    u.children.push_back(plan_branch(b, output));
    u.excard += u.children.back().excard;
  }
  u.xc = execution_cost(u, catalog_.cost_model);
  return u;
}

double Planner::host_triples(std::uint32_t host) const {
  double total = 0;
  for (const auto& f : catalog_.fragmentation.fragments()) {
    auto it = catalog_.stats.find(f.id);
    double size = it == catalog_.stats.end() ? static_cast<double>(f.size) : static_cast<double>(it->second.triples);
    if (f.remainder) {
      total += size / std::max<std::uint32_t>(1, catalog_.host_count);
    } else if (auto a = catalog_.allocation.find(f.id); a != catalog_.allocation.end() && a->second == host) {
      total += size;
    }
  }
  return total;
}

PlanOp Planner::localize(PlanOp op) const {
  const auto& model = catalog_.cost_model;
  if (op.kind != OpKind::IndexScan) {
    for (auto& c : op.children) c = localize(std::move(c));
    if (op.kind == OpKind::Union || op.kind == OpKind::Project) collapse_empty(op);
    return op;
  }
  std::map<std::uint32_t, std::vector<std::uint32_t>> by_host;
  for (auto f : op.fragments) {
    for (auto h : catalog_.hosts_of(f)) by_host[h].push_back(f);
  }
  if (by_host.empty()) return empty_like(op);
  std::vector<PlanOp> scans;
  for (const auto& [h, frags] : by_host) {
    PlanOp s = op;
    s.fragments = frags;
    s.hh = static_cast<std::int32_t>(h);
    s.excard = 0;
    for (auto f : frags) {
      double e = estimate(op.pattern, op.filters, f);
      if (f == catalog_.fragmentation.remainder_id()) e /= std::max<std::uint32_t>(1, catalog_.host_count);
      s.excard += e;
    }
    for (auto& [v, d] : s.distinct) d = std::min(d, s.excard);
    s.host_triples = host_triples(h);
    s.xc = execution_cost(s, model);
    scans.push_back(std::move(s));
  }
  return make_bmu_chain(std::move(scans), kNoHost, model);
}

PlanOp Planner::assign_home_hosts(PlanOp plan) const {
  const auto& model = catalog_.cost_model;
  collapse_empty(plan);
  if (plan.kind == OpKind::Empty) {
    plan.hh = 0;
    return plan;
  }
  std::uint32_t hosts = std::max<std::uint32_t>(1, catalog_.host_count);
  std::map<const PlanOp*, HostCosts> memo;
  auto table = host_costs(plan, hosts, model, memo);
  auto root = static_cast<std::int32_t>(std::min_element(table.begin(), table.end()) - table.begin());
  fix_hosts(plan, root, hosts, model, memo);
  return plan;
}

PlanOp Planner::apply_transformations(PlanOp plan) const {
  const auto& model = catalog_.cost_model;
  {
    std::vector<Path> paths;
    Path path;
    collect_paths(plan, path, paths, OpKind::MergeJoin);
    for (const auto& p : paths) {
      auto rewritten = partial_join_rewrite(node_at(plan, p), model);
      if (!rewritten) continue;
      PlanOp candidate = plan;
      node_at(candidate, p) = std::move(*rewritten);
      if (cost(candidate, model) < cost(plan, model)) plan = std::move(candidate);
    }
  }
  {
    std::vector<Path> paths;
    Path path;
    collect_paths(plan, path, paths, OpKind::HashJoin);
    for (const auto& p : paths) {
      const PlanOp& join = node_at(plan, p);
      std::optional<std::string> required;
      if (!p.empty()) {
        Path parent_path(p.begin(), p.end() - 1);
        const PlanOp& parent = node_at(plan, parent_path);
        if (parent.kind == OpKind::BMU) continue;
        if (parent.kind == OpKind::MergeJoin) required = parent.vars.front();
      }
      auto vars = join.vars;
      for (const auto& v : vars) {
        if (required && *required != v) continue;
        auto rewritten = hash_to_merge_rewrite(node_at(plan, p), v, model);
        PlanOp candidate = plan;
        node_at(candidate, p) = std::move(*rewritten);
        if (cost(candidate, model) < cost(plan, model)) plan = std::move(candidate);
        if (node_at(plan, p).kind != OpKind::HashJoin) break;
      }
    }
  }
  return plan;
}

PlanOp Planner::plan(const sparql::Query& query) const {
  return apply_transformations(assign_home_hosts(localize(initial_plan(query))));
}

}  // namespace partout::plan
