#pragma once

#include <cstdint>
#include <map>
#include <string_view>
#include <utility>
#include <vector>

#include "partout/fragment/fragmentation.hpp"
#include "partout/workload/analyzer.hpp"

namespace partout::alloc {

/// G(QL, M): fragments as nodes, join-witness weights on unordered pairs.
class FragmentGraph {
 public:
  void add(std::uint32_t a, std::uint32_t b, std::uint64_t w);
  void set(std::uint32_t a, std::uint32_t b, std::uint64_t w);
  std::uint64_t weight(std::uint32_t a, std::uint32_t b) const;
  /// Keys are (min, max).
  const std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t>& edges() const { return edges_; }

  friend bool operator==(const FragmentGraph&, const FragmentGraph&) = default;

 private:
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> edges_;
};

FragmentGraph build_fragment_graph(const workload::GlobalQueryGraph& g,
                                   const fragment::Fragmentation& frag);

/// What the greedy needs to know about a fragment.
struct FragmentLoad {
  std::uint32_t id = 0;
  std::uint64_t size = 0;
  std::uint64_t load = 0;
  bool remainder = false;
};

std::vector<FragmentLoad> fragment_loads(const fragment::Fragmentation& frag);

struct HostState {
  std::uint32_t id = 0;
  std::uint64_t capacity = 0;  // SC_h in bytes
  std::vector<std::uint32_t> fragments;
  std::uint64_t current_load = 0;  // CL_h
  std::uint64_t used_bytes = 0;
};

/// U = L / n over every fragment's load.
double uniform_load(const std::vector<FragmentLoad>& fragments, std::size_t hosts);

/// (2U / (U + CL_h)) * A with A = Σ_{m' in F_h} (w(m, m') + 1), or 1 for an
/// empty host. Without affinity A is always 1.
double benefit(std::uint32_t fragment, const HostState& host, double U, const FragmentGraph& graph,
               bool affinity = true);

struct AllocationOptions {
  double triple_bytes = 100;  // S_t
  bool affinity = true;
};

struct Allocation {
  std::map<std::uint32_t, std::uint32_t> fragment_host;  // non-remainder fragments
  std::uint32_t host_count = 0;
  std::vector<HostState> hosts;

  friend bool operator==(const Allocation& a, const Allocation& b) {
    return a.fragment_host == b.fragment_host && a.host_count == b.host_count;
  }
};

/// Greedy: fragments by descending load (ties by id), each to the feasible
/// host of maximal benefit (ties by host id). The remainder is left to hashing.
/// Throws AllocationError when a fragment fits nowhere.
Allocation allocate(const std::vector<FragmentLoad>& fragments, const FragmentGraph& graph,
                    const std::vector<std::uint64_t>& capacities, const AllocationOptions& options = {});

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

/// Host of a remainder triple: FNV-1a of the subject's lexical form mod n.
std::uint32_t remainder_host(std::string_view subject_lexical, std::uint32_t host_count);

}  // namespace partout::alloc
