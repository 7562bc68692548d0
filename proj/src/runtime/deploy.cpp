#include "partout/runtime/deploy.hpp"

#include <set>

#include <fmt/format.h>

#include "partout/error.hpp"

namespace partout::runtime {

using plan::OpKind;
using plan::PlanOp;

namespace {

void cut(PlanOp& op, Deployment& d) {
  if (op.hh == plan::kNoHost) throw PlanError(fmt::format("{} operator without home host", plan::kind_name(op.kind)));
  for (auto& child : op.children) {
    if (child.hh == plan::kNoHost) {
      throw PlanError(fmt::format("{} operator without home host", plan::kind_name(child.kind)));
    }
    if (child.hh == op.hh) {
      cut(child, d);
      continue;
    }
    auto id = static_cast<std::uint32_t>(d.exchanges.size());
    d.exchanges.push_back({id, child.hh, op.hh});
    d.subplans.push_back({child.hh, id, {}});
    PlanOp fetch;
    fetch.kind = OpKind::Fetch;
    fetch.exchange = id;
    fetch.columns = child.columns;
    fetch.sorted_by = child.sorted_by;
    fetch.hh = op.hh;
    fetch.excard = child.excard;
    fetch.distinct = child.distinct;
    PlanOp sub = std::move(child);
    child = std::move(fetch);
    cut(sub, d);
    d.subplans[id].plan = std::move(sub);
  }
}

}  // namespace

std::vector<std::int32_t> Deployment::hosts() const {
  std::set<std::int32_t> out;
  for (const auto& s : subplans) out.insert(s.host);
  return {out.begin(), out.end()};
}

std::vector<const SubPlan*> Deployment::subplans_at(std::int32_t host) const {
  std::vector<const SubPlan*> out;
  for (const auto& s : subplans) {
    if (s.host == host) out.push_back(&s);
  }
  return out;
}

std::size_t cut_edges(const PlanOp& plan) {
  std::size_t n = 0;
  for (const auto& c : plan.children) n += (c.hh != plan.hh) + cut_edges(c);
  return n;
}

Deployment split_and_deploy(const PlanOp& plan, std::uint64_t query_id) {
  Deployment d;
  d.query_id = query_id;
  PlanOp root = plan;
  if (root.hh == plan::kNoHost) throw PlanError("plan root without home host");
  d.exchanges.push_back({0, root.hh, kCoordinator});
  d.subplans.push_back({root.hh, 0, {}});
  cut(root, d);
  d.subplans[0].plan = std::move(root);
  if (d.exchanges.size() != cut_edges(plan) + 1) throw PlanError("dangling exchange edge");
  return d;
}

nlohmann::json to_json(const SubPlan& sub) {
  return {{"host", sub.host}, {"exchange", sub.exchange}, {"plan", plan::to_json(sub.plan)}};
}

SubPlan subplan_from_json(const nlohmann::json& j) {
  try {
    return {j.at("host").get<std::int32_t>(), j.at("exchange").get<std::uint32_t>(), plan::plan_from_json(j.at("plan"))};
  } catch (const nlohmann::json::exception& e) {
    throw ClusterError(std::string("malformed sub-plan: ") + e.what());
  }
}

}  // namespace partout::runtime
