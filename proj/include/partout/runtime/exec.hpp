#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "partout/plan/plan.hpp"
#include "partout/rdf/dictionary.hpp"
#include "partout/rdf/triple_store.hpp"
#include "partout/runtime/wire.hpp"

namespace partout::runtime {

/// Pull-based operator producing rows over a fixed column schema.
class Operator {
 public:
  explicit Operator(std::vector<std::string> columns) : columns_(std::move(columns)) {}
  virtual ~Operator() = default;

  /// False once exhausted.
  virtual bool next(Row& row) = 0;
  const std::vector<std::string>& columns() const { return columns_; }

 private:
  std::vector<std::string> columns_;
};

using OperatorPtr = std::unique_ptr<Operator>;
using FetchFactory = std::function<OperatorPtr(const plan::PlanOp& fetch)>;

struct ExecContext {
  const rdf::TripleStore* store = nullptr;
  const rdf::Dictionary* dict = nullptr;
  /// Required when the plan contains Fetch operators.
  FetchFactory fetch;
};

/// Operator tree for a plan. Throws PlanError for malformed plans.
OperatorPtr build_operator(const plan::PlanOp& op, const ExecContext& ctx);

/// Drains the operator.
std::vector<Row> drain(Operator& op);

/// Runs a plan with every scan against `store`, ignoring home hosts. Meant for
/// single-host plans: scans of the same pattern on different hosts would repeat rows.
std::vector<Row> run_local(const plan::PlanOp& plan, const rdf::TripleStore& store, const rdf::Dictionary& dict);

OperatorPtr rows_operator(std::vector<std::string> columns, std::vector<Row> rows);
/// Sorted merge on vars[0]; further vars must match too. Duplicate key groups
/// produce their cross product.
OperatorPtr merge_join(OperatorPtr left, OperatorPtr right, std::vector<std::string> vars,
                       std::vector<std::string> columns);
/// Builds on `build`, streams `probe`.
OperatorPtr hash_join(OperatorPtr build, OperatorPtr probe, std::vector<std::string> vars,
                      std::vector<std::string> columns);
/// Order-preserving merge on `sorted_by` without deduplication.
OperatorPtr merge_union(std::vector<OperatorPtr> inputs, std::vector<std::string> sorted_by,
                        std::vector<std::string> columns);

}  // namespace partout::runtime
