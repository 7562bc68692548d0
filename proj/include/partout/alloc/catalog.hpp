#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "partout/alloc/allocation.hpp"
#include "partout/fragment/fragmentation.hpp"
#include "partout/plan/cost_model.hpp"
#include "partout/rdf/triple_store.hpp"

namespace partout::alloc {

inline constexpr std::size_t kTopPropertyObjects = 1000;

/// Statistics of one fragment over all hosts that store parts of it.
struct FragmentStats {
  std::uint64_t triples = 0;
  std::uint64_t distinct_s = 0;
  std::uint64_t distinct_p = 0;
  std::uint64_t distinct_o = 0;
  std::map<rdf::TermId, std::uint64_t> property_counts;
  std::map<rdf::TermId, std::uint64_t> property_subjects;  // distinct subjects per property
  std::map<rdf::TermId, std::uint64_t> property_objects;   // distinct objects per property
  std::map<std::pair<rdf::TermId, rdf::TermId>, std::uint64_t> po_counts;
  /// True when po_counts was cut to the top entries; absent pairs are then unknown rather than zero.
  bool po_truncated = false;

  void record_insert(const rdf::Triple& t);
  void record_erase(const rdf::Triple& t);

  friend bool operator==(const FragmentStats&, const FragmentStats&) = default;
};

/// Accumulates exact statistics while triples are routed.
class StatsBuilder {
 public:
  void add(std::uint32_t fragment, const rdf::Triple& t);
  std::map<std::uint32_t, FragmentStats> finish() const;

 private:
  struct Acc {
    std::uint64_t triples = 0;
    std::unordered_set<rdf::TermId> s, p, o;
    std::unordered_map<rdf::TermId, std::uint64_t> props;
    std::unordered_map<rdf::TermId, std::unordered_set<rdf::TermId>> prop_s, prop_o;
    std::unordered_map<std::pair<rdf::TermId, rdf::TermId>, std::uint64_t, rdf::PairHash> po;
  };
  std::map<std::uint32_t, Acc> acc_;
};

struct HostEndpoint {
  std::uint32_t id = 0;
  std::string address;
  std::uint64_t capacity = 0;

  friend bool operator==(const HostEndpoint&, const HostEndpoint&) = default;
};

struct Catalog {
  static constexpr int kVersion = 1;

  plan::CostModel cost_model;
  std::string dictionary_path;
  double triple_bytes = 100;
  fragment::Fragmentation fragmentation;
  FragmentGraph graph;
  std::map<std::uint32_t, std::uint32_t> allocation;
  std::uint32_t host_count = 0;
  std::vector<HostEndpoint> hosts;
  std::map<std::uint32_t, FragmentStats> stats;
  /// Polarity masks present in the remainder besides 0, with triple counts.
  std::map<fragment::Mask, std::uint64_t> remainder_strays;

  /// Hosts storing parts of the fragment: one, or all for the remainder.
  std::vector<std::uint32_t> hosts_of(std::uint32_t fragment) const;
  std::vector<fragment::Mask> stray_masks() const;
  const FragmentStats& stats_of(std::uint32_t fragment) const;
  /// Host of a concrete triple.
  std::uint32_t route(const rdf::Triple& t, const rdf::Dictionary& dict) const;

  friend bool operator==(const Catalog&, const Catalog&) = default;
};

/// Catalog without statistics for an allocation; stats come from bootstrap
/// or compute_stats().
Catalog make_catalog(const fragment::Fragmentation& frag, const FragmentGraph& graph,
                     const Allocation& allocation, const std::vector<HostEndpoint>& hosts,
                     const plan::CostModel& cost_model = {});

/// Fills stats and remainder strays from a full store.
void compute_stats(Catalog& catalog, const rdf::TripleStore& store, const rdf::Dictionary& dict);

nlohmann::json to_json(const fragment::Fragmentation& frag);
fragment::Fragmentation fragmentation_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FragmentGraph& graph);
FragmentGraph fragment_graph_from_json(const nlohmann::json& j);
nlohmann::json to_json(const plan::CostModel& model);
plan::CostModel cost_model_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Catalog& catalog);
/// Throws FormatError for a missing or different version and malformed content.
Catalog catalog_from_json(const nlohmann::json& j);

void save_catalog(const Catalog& catalog, const std::filesystem::path& path);
Catalog load_catalog(const std::filesystem::path& path);

/// Output of the partition step: fragments plus their query graph.
struct FragmentationFile {
  fragment::Fragmentation fragmentation;
  FragmentGraph graph;
  std::uint64_t theta = 2;

  friend bool operator==(const FragmentationFile&, const FragmentationFile&) = default;
};

void save_fragmentation(const FragmentationFile& file, const std::filesystem::path& path);
FragmentationFile load_fragmentation(const std::filesystem::path& path);

}  // namespace partout::alloc
