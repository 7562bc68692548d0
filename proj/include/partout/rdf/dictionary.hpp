#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <optional>
#include <shared_mutex>
#include <unordered_map>

#include "partout/rdf/term.hpp"

namespace partout::rdf {

using TermId = std::uint64_t;

/// Id 0 is never assigned; a bound pattern position holding it matches nothing.
inline constexpr TermId kUnassigned = 0;

/// Bijective Term <-> TermId mapping. Ids are dense from 1 in first-intern
/// order. Safe for concurrent readers with one writer.
class Dictionary {
 public:
  Dictionary() = default;
  Dictionary(const Dictionary& other);
  Dictionary& operator=(const Dictionary& other);
  Dictionary(Dictionary&& other) noexcept;
  Dictionary& operator=(Dictionary&& other) noexcept;

  /// Returns the id of `term`, assigning the next id when it is new.
  TermId intern(const Term& term);
  std::optional<TermId> find(const Term& term) const;
  /// Id of `term`, or kUnassigned when absent.
  TermId lookup(const Term& term) const { return find(term).value_or(kUnassigned); }

  /// Throws std::out_of_range for unassigned ids. The reference stays valid
  /// for the lifetime of the dictionary.
  const Term& term(TermId id) const;
  bool contains(TermId id) const;

  std::size_t size() const;
  TermId next_id() const { return static_cast<TermId>(size()) + 1; }

  /// `id<TAB>kind<TAB>lexical\n` per entry, ids ascending.
  void write(std::ostream& out) const;
  /// Entries with ids >= `from`, same record format as write().
  void write_from(std::ostream& out, TermId from) const;
  static Dictionary read(std::istream& in);
  /// Adds records continuing this dictionary; records for known ids must agree.
  void append(std::istream& in);

  friend bool operator==(const Dictionary& a, const Dictionary& b);

 private:
  mutable std::shared_mutex mutex_;
  std::deque<Term> terms_;
  std::unordered_map<Term, TermId, TermHash> ids_;
};

}  // namespace partout::rdf
