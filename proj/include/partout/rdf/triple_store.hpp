#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <shared_mutex>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "partout/rdf/dictionary.hpp"

namespace partout::rdf {

struct Triple {
  TermId s = kUnassigned;
  TermId p = kUnassigned;
  TermId o = kUnassigned;

  friend bool operator==(const Triple&, const Triple&) = default;
  friend auto operator<=>(const Triple&, const Triple&) = default;
};

enum class Component : std::uint8_t { Subject = 0, Property = 1, Object = 2 };

inline TermId component_of(const Triple& t, Component c) {
  switch (c) {
    case Component::Subject: return t.s;
    case Component::Property: return t.p;
    case Component::Object: return t.o;
  }
  return kUnassigned;
}

enum class IndexOrder : std::uint8_t { SPO = 0, SOP, PSO, POS, OSP, OPS };

inline constexpr std::array<IndexOrder, 6> kAllOrders = {
    IndexOrder::SPO, IndexOrder::SOP, IndexOrder::PSO,
    IndexOrder::POS, IndexOrder::OSP, IndexOrder::OPS};

/// Component sequence of an index order, e.g. POS -> {P, O, S}.
std::array<Component, 3> components(IndexOrder order);
std::string_view order_name(IndexOrder order);
std::optional<IndexOrder> order_from_name(std::string_view name);

/// A triple pattern over ids: unset positions are wildcards.
struct IdPattern {
  std::optional<TermId> s, p, o;

  std::optional<TermId> at(Component c) const {
    switch (c) {
      case Component::Subject: return s;
      case Component::Property: return p;
      case Component::Object: return o;
    }
    return std::nullopt;
  }
  bool matches(const Triple& t) const {
    return (!s || *s == t.s) && (!p || *p == t.p) && (!o || *o == t.o);
  }
};

/// True when the bound positions of `pattern` form a prefix of `order`.
bool order_compatible(const IdPattern& pattern, IndexOrder order);

struct PairHash {
  std::size_t operator()(const std::pair<TermId, TermId>& v) const noexcept {
    return std::hash<TermId>{}(v.first * 0x9E3779B97F4A7C15ULL ^ v.second);
  }
};

/// In-memory triple set with all six permutation indexes and aggregated count
/// tables. Single writer, concurrent readers; every read observes all six
/// indexes in the same state.
class TripleStore {
 public:
  TripleStore() = default;
  TripleStore(const TripleStore& other);
  TripleStore& operator=(const TripleStore& other);
  TripleStore(TripleStore&& other) noexcept;
  TripleStore& operator=(TripleStore&& other) noexcept;

  /// Returns false (store unchanged) for duplicates.
  bool insert(const Triple& triple);
  /// Returns false (store unchanged) when the triple is absent.
  bool erase(const Triple& triple);
  /// Inserts every triple; returns how many were new.
  std::size_t insert_all(std::span<const Triple> triples);

  bool contains(const Triple& triple) const;
  std::size_t size() const;

  /// Matching triples sorted in `order`. Throws std::invalid_argument when the
  /// bound components are not a prefix of `order`.
  std::vector<Triple> scan(const IdPattern& pattern, IndexOrder order) const;
  /// Exact match count.
  std::uint64_t cardinality(const IdPattern& pattern) const;

  /// Bernoulli sample: each triple (visited in SPO order) kept with
  /// probability `fraction` under a generator seeded by `seed`.
  TripleStore sample(double fraction, std::uint64_t seed) const;

  /// All triples in SPO order.
  std::vector<Triple> triples() const;

  std::uint64_t property_count(TermId p) const;
  std::uint64_t property_object_count(TermId p, TermId o) const;
  std::uint64_t property_subject_count(TermId p, TermId s) const;

  /// Index content in `order`, for consistency checks.
  std::vector<Triple> index_content(IndexOrder order) const;

  friend bool operator==(const TripleStore& a, const TripleStore& b);

 private:
  using Key = std::array<TermId, 3>;

  bool insert_locked(const Triple& triple);
  std::uint64_t count_range_locked(const IdPattern& pattern, IndexOrder order) const;

  mutable std::shared_mutex mutex_;
  std::array<std::set<Key>, 6> indexes_;
  std::unordered_map<TermId, std::uint64_t> property_counts_;
  std::unordered_map<std::pair<TermId, TermId>, std::uint64_t, PairHash> po_counts_;
  std::unordered_map<std::pair<TermId, TermId>, std::uint64_t, PairHash> ps_counts_;
};

}  // namespace partout::rdf
