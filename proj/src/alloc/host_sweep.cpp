#include "partout/alloc/host_sweep.hpp"

#include <limits>

#include <fmt/format.h>

#include "partout/error.hpp"
#include "partout/plan/plan.hpp"

namespace partout::alloc {

HostSweep optimal_host_count(const Catalog& base, const rdf::Dictionary& dict, const workload::QueryLog& log,
                             std::uint32_t n_min, std::uint32_t n_max, std::uint64_t capacity,
                             const AllocationOptions& options) {
  if (n_min == 0 || n_min > n_max) throw Error(fmt::format("invalid host range {}..{}", n_min, n_max));
  auto loads = fragment_loads(base.fragmentation);
  std::uint64_t cap = capacity == 0 ? std::numeric_limits<std::uint64_t>::max() / 2 : capacity;
  HostSweep sweep;
  for (std::uint32_t n = n_min; n <= n_max; ++n) {
    auto allocation = allocate(loads, base.graph, std::vector<std::uint64_t>(n, cap), options);
    std::vector<HostEndpoint> hosts;
    for (std::uint32_t h = 0; h < n; ++h) hosts.push_back({h, "", capacity});
    Catalog catalog = make_catalog(base.fragmentation, base.graph, allocation, hosts, base.cost_model);
    catalog.triple_bytes = options.triple_bytes;
    catalog.stats = base.stats;
    catalog.remainder_strays = base.remainder_strays;
    plan::Planner planner(catalog, dict);
    double total = 0;
    for (const auto& entry : log) {
      total += static_cast<double>(entry.multiplicity) * plan::cost(planner.plan(entry.query), catalog.cost_model);
    }
    sweep.points.push_back({n, total});
    if (sweep.best == 0 || total < sweep.points[sweep.best - n_min].cost) sweep.best = n;
  }
  return sweep;
}

}  // namespace partout::alloc
