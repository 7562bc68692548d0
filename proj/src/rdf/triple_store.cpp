#include "partout/rdf/triple_store.hpp"

#include <limits>
#include <mutex>
#include <random>
#include <stdexcept>

namespace partout::rdf {

namespace {

constexpr TermId kMaxId = std::numeric_limits<TermId>::max();

std::array<TermId, 3> permute(const Triple& t, IndexOrder order) {
  auto comps = components(order);
  return {component_of(t, comps[0]), component_of(t, comps[1]), component_of(t, comps[2])};
}

Triple unpermute(const std::array<TermId, 3>& key, IndexOrder order) {
  Triple t;
  auto comps = components(order);
  for (int i = 0; i < 3; ++i) {
    switch (comps[i]) {
      case Component::Subject: t.s = key[i]; break;
      case Component::Property: t.p = key[i]; break;
      case Component::Object: t.o = key[i]; break;
    }
  }
  return t;
}

void decrement(auto& map, const auto& key) {
  auto it = map.find(key);
  if (it == map.end()) return;
  if (--it->second == 0) map.erase(it);
}

/// Picks an order whose prefix covers the bound components.
IndexOrder probe_order(const IdPattern& pattern) {
  for (IndexOrder order : kAllOrders) {
    if (order_compatible(pattern, order)) return order;
  }
  return IndexOrder::SPO;
}

}  // namespace

std::array<Component, 3> components(IndexOrder order) {
  using C = Component;
  switch (order) {
    case IndexOrder::SPO: return {C::Subject, C::Property, C::Object};
    case IndexOrder::SOP: return {C::Subject, C::Object, C::Property};
    case IndexOrder::PSO: return {C::Property, C::Subject, C::Object};
    case IndexOrder::POS: return {C::Property, C::Object, C::Subject};
    case IndexOrder::OSP: return {C::Object, C::Subject, C::Property};
    case IndexOrder::OPS: return {C::Object, C::Property, C::Subject};
  }
  return {C::Subject, C::Property, C::Object};
}

std::string_view order_name(IndexOrder order) {
  static constexpr std::array<std::string_view, 6> kNames = {"SPO", "SOP", "PSO",
                                                             "POS", "OSP", "OPS"};
  return kNames[static_cast<std::size_t>(order)];
}

std::optional<IndexOrder> order_from_name(std::string_view name) {
  for (IndexOrder order : kAllOrders) {
    if (order_name(order) == name) return order;
  }
  return std::nullopt;
}

bool order_compatible(const IdPattern& pattern, IndexOrder order) {
  auto comps = components(order);
  bool prefix = true;
  for (Component c : comps) {
    bool bound = pattern.at(c).has_value();
    if (bound && !prefix) return false;
    if (!bound) prefix = false;
  }
  return true;
}

TripleStore::TripleStore(const TripleStore& other) {
  std::shared_lock lock(other.mutex_);
  indexes_ = other.indexes_;
  property_counts_ = other.property_counts_;
  po_counts_ = other.po_counts_;
  ps_counts_ = other.ps_counts_;
}

TripleStore& TripleStore::operator=(const TripleStore& other) {
  if (this == &other) return *this;
  TripleStore copy(other);
  *this = std::move(copy);
  return *this;
}

TripleStore::TripleStore(TripleStore&& other) noexcept
    : indexes_(std::move(other.indexes_)),
      property_counts_(std::move(other.property_counts_)),
      po_counts_(std::move(other.po_counts_)),
      ps_counts_(std::move(other.ps_counts_)) {}

TripleStore& TripleStore::operator=(TripleStore&& other) noexcept {
  std::unique_lock lock(mutex_);
  indexes_ = std::move(other.indexes_);
  property_counts_ = std::move(other.property_counts_);
  po_counts_ = std::move(other.po_counts_);
  ps_counts_ = std::move(other.ps_counts_);
  return *this;
}

bool TripleStore::insert_locked(const Triple& triple) {
  auto [it, inserted] = indexes_[0].insert(permute(triple, IndexOrder::SPO));
  if (!inserted) return false;
  for (std::size_t i = 1; i < kAllOrders.size(); ++i) {
    indexes_[i].insert(permute(triple, kAllOrders[i]));
  }
  ++property_counts_[triple.p];
  ++po_counts_[{triple.p, triple.o}];
  ++ps_counts_[{triple.p, triple.s}];
  return true;
}

bool TripleStore::insert(const Triple& triple) {
  if (triple.s == kUnassigned || triple.p == kUnassigned || triple.o == kUnassigned) {
    throw std::invalid_argument("triple with unassigned id");
  }
  std::unique_lock lock(mutex_);
  return insert_locked(triple);
}

std::size_t TripleStore::insert_all(std::span<const Triple> triples) {
  std::unique_lock lock(mutex_);
  std::size_t added = 0;
  for (const Triple& t : triples) {
    if (t.s == kUnassigned || t.p == kUnassigned || t.o == kUnassigned) {
      throw std::invalid_argument("triple with unassigned id");
    }
    added += insert_locked(t) ? 1 : 0;
  }
  return added;
}

bool TripleStore::erase(const Triple& triple) {
  std::unique_lock lock(mutex_);
  if (indexes_[0].erase(permute(triple, IndexOrder::SPO)) == 0) return false;
  for (std::size_t i = 1; i < kAllOrders.size(); ++i) {
    indexes_[i].erase(permute(triple, kAllOrders[i]));
  }
  decrement(property_counts_, triple.p);
  decrement(po_counts_, std::pair{triple.p, triple.o});
  decrement(ps_counts_, std::pair{triple.p, triple.s});
  return true;
}

bool TripleStore::contains(const Triple& triple) const {
  std::shared_lock lock(mutex_);
  return indexes_[0].contains(permute(triple, IndexOrder::SPO));
}

std::size_t TripleStore::size() const {
  std::shared_lock lock(mutex_);
  return indexes_[0].size();
}

std::vector<Triple> TripleStore::scan(const IdPattern& pattern, IndexOrder order) const {
  if (!order_compatible(pattern, order)) {
    throw std::invalid_argument("index order " + std::string(order_name(order)) +
                                " does not cover the bound components");
  }
  auto comps = components(order);
  Key lo{0, 0, 0};
  Key hi{kMaxId, kMaxId, kMaxId};
  for (int i = 0; i < 3; ++i) {
    if (auto v = pattern.at(comps[i])) {
      lo[i] = *v;
      hi[i] = *v;
    } else {
      break;
    }
  }
  std::vector<Triple> out;
  std::shared_lock lock(mutex_);
  const auto& index = indexes_[static_cast<std::size_t>(order)];
  for (auto it = index.lower_bound(lo); it != index.end() && *it <= hi; ++it) {
    out.push_back(unpermute(*it, order));
  }
  return out;
}

std::uint64_t TripleStore::count_range_locked(const IdPattern& pattern, IndexOrder order) const {
  auto comps = components(order);
  Key lo{0, 0, 0};
  Key hi{kMaxId, kMaxId, kMaxId};
  for (int i = 0; i < 3; ++i) {
    if (auto v = pattern.at(comps[i])) {
      lo[i] = *v;
      hi[i] = *v;
    } else {
      break;
    }
  }
  const auto& index = indexes_[static_cast<std::size_t>(order)];
  std::uint64_t n = 0;
  for (auto it = index.lower_bound(lo); it != index.end() && *it <= hi; ++it) ++n;
  return n;
}

std::uint64_t TripleStore::cardinality(const IdPattern& pattern) const {
  std::shared_lock lock(mutex_);
  const bool s = pattern.s.has_value(), p = pattern.p.has_value(), o = pattern.o.has_value();
  auto lookup = [](const auto& map, const auto& key) -> std::uint64_t {
    auto it = map.find(key);
    return it == map.end() ? 0 : it->second;
  };
  if (!s && !p && !o) return indexes_[0].size();
  if (s && p && o) {
    return indexes_[0].contains(Key{*pattern.s, *pattern.p, *pattern.o}) ? 1 : 0;
  }
  if (p && !s && !o) return lookup(property_counts_, *pattern.p);
  if (p && o && !s) return lookup(po_counts_, std::pair{*pattern.p, *pattern.o});
  if (p && s && !o) return lookup(ps_counts_, std::pair{*pattern.p, *pattern.s});
  return count_range_locked(pattern, probe_order(pattern));
}

TripleStore TripleStore::sample(double fraction, std::uint64_t seed) const {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("sample fraction must be in (0, 1]");
  }
  TripleStore result;
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution keep(fraction);
  std::shared_lock lock(mutex_);
  for (const Key& key : indexes_[0]) {
    if (fraction >= 1.0 || keep(rng)) result.insert_locked(unpermute(key, IndexOrder::SPO));
  }
  return result;
}

std::vector<Triple> TripleStore::triples() const { return index_content(IndexOrder::SPO); }

std::vector<Triple> TripleStore::index_content(IndexOrder order) const {
  std::shared_lock lock(mutex_);
  const auto& index = indexes_[static_cast<std::size_t>(order)];
  std::vector<Triple> out;
  out.reserve(index.size());
  for (const Key& key : index) out.push_back(unpermute(key, order));
  return out;
}

std::uint64_t TripleStore::property_count(TermId p) const {
  std::shared_lock lock(mutex_);
  auto it = property_counts_.find(p);
  return it == property_counts_.end() ? 0 : it->second;
}

std::uint64_t TripleStore::property_object_count(TermId p, TermId o) const {
  std::shared_lock lock(mutex_);
  auto it = po_counts_.find({p, o});
  return it == po_counts_.end() ? 0 : it->second;
}

std::uint64_t TripleStore::property_subject_count(TermId p, TermId s) const {
  std::shared_lock lock(mutex_);
  auto it = ps_counts_.find({p, s});
  return it == ps_counts_.end() ? 0 : it->second;
}

bool operator==(const TripleStore& a, const TripleStore& b) {
  if (&a == &b) return true;
  std::shared_lock la(a.mutex_, std::defer_lock);
  std::shared_lock lb(b.mutex_, std::defer_lock);
  std::lock(la, lb);
  return a.indexes_[0] == b.indexes_[0];
}

}  // namespace partout::rdf
