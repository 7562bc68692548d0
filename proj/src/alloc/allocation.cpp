#include "partout/alloc/allocation.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "partout/error.hpp"

namespace partout::alloc {

namespace {

std::pair<std::uint32_t, std::uint32_t> key(std::uint32_t a, std::uint32_t b) {
  return a <= b ? std::pair{a, b} : std::pair{b, a};
}

}  // namespace

void FragmentGraph::add(std::uint32_t a, std::uint32_t b, std::uint64_t w) {
  if (w > 0) edges_[key(a, b)] += w;
}

void FragmentGraph::set(std::uint32_t a, std::uint32_t b, std::uint64_t w) {
  if (w == 0) {
    edges_.erase(key(a, b));
  } else {
    edges_[key(a, b)] = w;
  }
}

std::uint64_t FragmentGraph::weight(std::uint32_t a, std::uint32_t b) const {
  auto it = edges_.find(key(a, b));
  return it == edges_.end() ? 0 : it->second;
}

FragmentGraph build_fragment_graph(const workload::GlobalQueryGraph& g,
                                   const fragment::Fragmentation& frag) {
  std::map<workload::AnonPattern, std::vector<std::uint32_t>> overlapping;
  for (const auto& [pattern, f] : g.nodes) {
    auto& ids = overlapping[pattern];
    for (const auto& m : frag.fragments()) {
      if (frag.overlaps(m.id, pattern)) ids.push_back(m.id);
    }
  }
  FragmentGraph out;
  for (const auto& [edge, w] : g.edges) {
    std::set<std::pair<std::uint32_t, std::uint32_t>> pairs;
    for (std::uint32_t a : overlapping[edge.first]) {
      for (std::uint32_t b : overlapping[edge.second]) pairs.insert(key(a, b));
    }
    for (const auto& [a, b] : pairs) out.add(a, b, w);
  }
  return out;
}

std::vector<FragmentLoad> fragment_loads(const fragment::Fragmentation& frag) {
  std::vector<FragmentLoad> out;
  for (const auto& f : frag.fragments()) out.push_back({f.id, f.size, f.load(), f.remainder});
  return out;
}

double uniform_load(const std::vector<FragmentLoad>& fragments, std::size_t hosts) {
  double total = 0;
  for (const auto& f : fragments) total += static_cast<double>(f.load);
  return total / static_cast<double>(hosts);
}

double benefit(std::uint32_t fragment, const HostState& host, double U, const FragmentGraph& graph,
               bool affinity) {
  double balance = 2.0 * U / (U + static_cast<double>(host.current_load));
  if (!affinity || host.fragments.empty()) return balance;
  double a = 0;
  for (std::uint32_t other : host.fragments) {
    a += static_cast<double>(graph.weight(fragment, other)) + 1.0;
  }
  return balance * a;
}

Allocation allocate(const std::vector<FragmentLoad>& fragments, const FragmentGraph& graph,
                    const std::vector<std::uint64_t>& capacities, const AllocationOptions& options) {
  if (capacities.empty()) throw AllocationError("no hosts to allocate to");
  Allocation out;
  out.host_count = static_cast<std::uint32_t>(capacities.size());
  for (std::uint32_t h = 0; h < capacities.size(); ++h) {
    out.hosts.push_back({h, capacities[h], {}, 0, 0});
  }
  double U = uniform_load(fragments, capacities.size());

  std::vector<FragmentLoad> order;
  for (const auto& f : fragments) {
    if (!f.remainder) order.push_back(f);
  }
  std::stable_sort(order.begin(), order.end(), [](const FragmentLoad& a, const FragmentLoad& b) {
    return a.load != b.load ? a.load > b.load : a.id < b.id;
  });

  for (const auto& f : order) {
    auto bytes = static_cast<std::uint64_t>(static_cast<double>(f.size) * options.triple_bytes);
    HostState* best = nullptr;
    double best_benefit = 0;
    std::uint64_t most_free = 0;
    for (auto& h : out.hosts) {
      std::uint64_t free = h.capacity > h.used_bytes ? h.capacity - h.used_bytes : 0;
      most_free = std::max(most_free, free);
      if (free < bytes) continue;
      double b = benefit(f.id, h, U, graph, options.affinity);
      if (!best || b > best_benefit) {
        best = &h;
        best_benefit = b;
      }
    }
    if (!best) {
      throw AllocationError(fmt::format(
          "no host can store fragment {}: needs {} bytes, largest free capacity {} (deficit {})", f.id,
          bytes, most_free, bytes - most_free));
    }
    best->fragments.push_back(f.id);
    best->current_load += f.load;
    best->used_bytes += bytes;
    out.fragment_host[f.id] = best->id;
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint32_t remainder_host(std::string_view subject_lexical, std::uint32_t host_count) {
  if (host_count == 0) throw AllocationError("remainder hashing needs at least one host");
  return static_cast<std::uint32_t>(fnv1a64(subject_lexical) % host_count);
}

}  // namespace partout::alloc
