#pragma once

#include <cstdint>
#include <vector>

#include "partout/alloc/allocation.hpp"
#include "partout/alloc/catalog.hpp"
#include "partout/rdf/dictionary.hpp"
#include "partout/workload/analyzer.hpp"

namespace partout::alloc {

struct SweepPoint {
  std::uint32_t hosts = 0;
  /// Estimated plan costs summed over the query log, weighted by multiplicity.
  double cost = 0;
};

struct HostSweep {
  std::vector<SweepPoint> points;
  std::uint32_t best = 0;
};

/// Allocates and plans the log for every n in [n_min, n_max]; `base` supplies the
/// fragmentation, fragment graph, cost model and statistics. Capacity 0 means
/// unbounded. Ties go to the smallest n.
HostSweep optimal_host_count(const Catalog& base, const rdf::Dictionary& dict, const workload::QueryLog& log,
                             std::uint32_t n_min, std::uint32_t n_max, std::uint64_t capacity = 0,
                             const AllocationOptions& options = {});

}  // namespace partout::alloc
