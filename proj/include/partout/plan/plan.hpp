#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "partout/alloc/catalog.hpp"
#include "partout/plan/cost_model.hpp"
#include "partout/rdf/dictionary.hpp"
#include "partout/sparql/query.hpp"

namespace partout::plan {

/// Fetch reads a remote sub-plan's output; it only appears in deployed sub-plans.
enum class OpKind : std::uint8_t { IndexScan, Project, MergeJoin, HashJoin, BMU, Sort, Union, Empty, Fetch };

std::string_view kind_name(OpKind kind);

inline constexpr std::int32_t kNoHost = -1;

struct PlanOp {
  OpKind kind = OpKind::Empty;
  std::vector<PlanOp> children;

  // IndexScan: pattern, index order, fragments read, filters fused into the scan.
  sparql::TriplePattern pattern;
  rdf::IndexOrder order = rdf::IndexOrder::SPO;
  std::vector<std::uint32_t> fragments;
  std::vector<sparql::FilterExpr> filters;
  /// Triples stored on the scanning host, for the per-host scan term.
  double host_triples = 0;

  /// Join variables (joins), sort keys (Sort) or output variables (Project).
  std::vector<std::string> vars;
  /// Output schema.
  std::vector<std::string> columns;
  /// Output order; empty when unsorted.
  std::vector<std::string> sorted_by;

  /// Fetch: exchange id the input arrives on.
  std::uint32_t exchange = 0;

  std::int32_t hh = kNoHost;
  double excard = 0;
  double xc = 0;
  /// Estimated distinct values per output column.
  std::map<std::string, double> distinct;

  friend bool operator==(const PlanOp&, const PlanOp&) = default;
};

/// tc(child, parent): t_page per started page of the child's output when
/// the two run on different hosts, 0 otherwise.
double transfer_cost(const PlanOp& child, const PlanOp& parent, const CostModel& model);
/// xc(op) from its kind and cardinalities.
double execution_cost(const PlanOp& op, const CostModel& model);
/// c(op) = xc(op) + max over children x of (tc(x, op) + c(x)).
double cost(const PlanOp& op, const CostModel& model);
/// Cost with every transfer cost taken as zero.
double local_cost(const PlanOp& op, const CostModel& model);

/// One operator per line, two spaces of indent per depth, `[hh=K excard=N xc=C]` suffix.
std::string explain(const PlanOp& plan);

nlohmann::json to_json(const PlanOp& op);
PlanOp plan_from_json(const nlohmann::json& j);

/// Join output cardinality |L|·|R| / Π max(d_L(v), d_R(v)) over the join variables.
double join_cardinality(const PlanOp& left, const PlanOp& right, const std::vector<std::string>& vars);

inline constexpr std::size_t kDpPatternLimit = 12;

class Planner {
 public:
  Planner(const alloc::Catalog& catalog, const rdf::Dictionary& dict);

  /// Host-agnostic plan: DP (or greedy beyond the limit) over MergeJoin /
  /// HashJoin trees of IndexScans, projected to the output variables.
  /// Throws PlanError for queries validate_executable rejects.
  PlanOp initial_plan(const sparql::Query& query) const;
  /// Splits every scan into per-host scans joined by a left-deep BMU chain.
  PlanOp localize(PlanOp plan) const;
  /// Tries every host as root candidate and keeps the cheapest assignment.
  PlanOp assign_home_hosts(PlanOp plan) const;
  /// Partial-join and hash-to-merge rewrites, each kept only when cheaper.
  PlanOp apply_transformations(PlanOp plan) const;
  /// All four steps.
  PlanOp plan(const sparql::Query& query) const;

  /// Estimated matches of a pattern inside one fragment (all hosts), filters applied.
  double estimate(const sparql::TriplePattern& pattern, const std::vector<sparql::FilterExpr>& filters,
                  std::uint32_t fragment) const;
  /// Fragments that may contain matches; empty when a constant is unknown.
  std::vector<std::uint32_t> relevant_fragments(const sparql::TriplePattern& pattern) const;
  /// Scan over every relevant fragment with estimates filled in, unlocalized.
  PlanOp scan(const sparql::TriplePattern& pattern, rdf::IndexOrder order,
              const std::vector<sparql::FilterExpr>& filters) const;

  const CostModel& cost_model() const { return catalog_.cost_model; }

 private:
  PlanOp plan_branch(const sparql::GraphPattern& branch, const std::vector<std::string>& output) const;
  double host_triples(std::uint32_t host) const;

  const alloc::Catalog& catalog_;
  const rdf::Dictionary& dict_;
};

/// Filter selectivities used by the estimator.
inline constexpr double kCompareSelectivity = 1.0 / 3.0;
inline constexpr double kFuncSelectivity = 0.5;

}  // namespace partout::plan
