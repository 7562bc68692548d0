#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "partout/plan/plan.hpp"

namespace partout::runtime {

/// Consumer host of the exchange carrying final results.
inline constexpr std::int32_t kCoordinator = -1;

struct Exchange {
  std::uint32_t id = 0;
  std::int32_t producer = 0;
  std::int32_t consumer = kCoordinator;

  friend bool operator==(const Exchange&, const Exchange&) = default;
};

/// A maximal same-host subtree. Cut children are Fetch operators; the output
/// leaves through `exchange`.
struct SubPlan {
  std::int32_t host = 0;
  std::uint32_t exchange = 0;
  plan::PlanOp plan;

  friend bool operator==(const SubPlan&, const SubPlan&) = default;
};

struct Deployment {
  std::uint64_t query_id = 0;
  std::vector<SubPlan> subplans;     // indexed by exchange id
  std::vector<Exchange> exchanges;   // exchange 0 delivers to the coordinator

  std::vector<std::int32_t> hosts() const;
  std::vector<const SubPlan*> subplans_at(std::int32_t host) const;
};

/// Parent/child pairs with differing home hosts.
std::size_t cut_edges(const plan::PlanOp& plan);

/// Cuts the plan at every home-host change. Throws PlanError for operators
/// without a home host.
Deployment split_and_deploy(const plan::PlanOp& plan, std::uint64_t query_id);

nlohmann::json to_json(const SubPlan& sub);
SubPlan subplan_from_json(const nlohmann::json& j);

}  // namespace partout::runtime
