#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "partout/rdf/compare.hpp"
#include "partout/rdf/ntriples.hpp"
#include "partout/rdf/term.hpp"
#include "partout/rdf/triple_store.hpp"
#include "partout/workload/analyzer.hpp"

namespace partout::fragment {

enum class FuncKind : std::uint8_t { IsIri, IsLiteral };

/// A constraint on one triple component: `comp op constant` or `func(comp)`.
struct SimplePredicate {
  rdf::Component component = rdf::Component::Property;
  bool is_func = false;
  rdf::CompareOp op = rdf::CompareOp::Equal;
  rdf::Term constant;
  FuncKind func = FuncKind::IsIri;

  static SimplePredicate compare(rdf::Component c, rdf::CompareOp op, rdf::Term constant);
  static SimplePredicate function(rdf::Component c, FuncKind f);

  bool holds(const rdf::Term& value) const;

  friend bool operator==(const SimplePredicate&, const SimplePredicate&) = default;
};

/// Predicate order: prop before obj before subj, then by text.
bool operator<(const SimplePredicate& a, const SimplePredicate& b);
std::string to_string(const SimplePredicate& p);

/// A predicate in positive or negated form.
struct Literal {
  const SimplePredicate* predicate;
  bool positive;
};

/// Conservative satisfiability of a conjunction of literals: false only for
/// contradictions detectable per component.
bool satisfiable(const std::vector<Literal>& conjunction);

/// S(QL): equalities from constant positions of Φ plus filter-derived
/// predicates at every position of the filtered variable. `normalized_log`
/// must be normalized with the same threshold used for Φ.
std::vector<SimplePredicate> extract_simple_predicates(const workload::PatternFrequencies& phi,
                                                       const workload::QueryLog& normalized_log);

/// Bit i set = predicate i in positive form. At most kMaxPredicates predicates.
using Mask = std::uint32_t;
inline constexpr std::size_t kMaxPredicates = 24;

bool satisfiable(const std::vector<SimplePredicate>& preds, Mask mask, std::size_t prefix_len);

/// Polarity masks of the sample triples, grouped by distinct mask.
class SampleMatrix {
 public:
  SampleMatrix() = default;
  SampleMatrix(const std::vector<SimplePredicate>& preds, const rdf::TripleStore& sample,
               const rdf::Dictionary& dict);

  std::uint64_t triple_count() const { return triples_; }
  const std::unordered_map<Mask, std::uint64_t>& mask_counts() const { return counts_; }
  std::uint64_t count(Mask mask) const;
  /// Same sample seen through predicates `subset` (indexes, ascending) only.
  SampleMatrix project(const std::vector<std::size_t>& subset) const;

 private:
  std::uint64_t triples_ = 0;
  std::unordered_map<Mask, std::uint64_t> counts_;
};

/// Satisfiable minterms by recursive refinement. With a sample, only
/// branches matching at least one sample triple are expanded; the
/// all-negative minterm is always kept. Throws when |preds| exceeds the cap.
std::vector<Mask> generate_minterms(const std::vector<SimplePredicate>& preds,
                                    const SampleMatrix* sample = nullptr);

/// True iff the minterm conjoined with the pattern's positional equalities is satisfiable.
bool overlaps(const std::vector<SimplePredicate>& preds, Mask minterm,
              const workload::AnonPattern& pattern);

struct Fragment {
  std::uint32_t id = 0;
  Mask minterm = 0;
  bool remainder = false;
  std::uint64_t freq = 0;
  std::uint64_t size = 0;

  std::uint64_t load() const { return freq * size; }
  friend bool operator==(const Fragment&, const Fragment&) = default;
};

/// Fragments ordered by id (1-based); the remainder is last. The remainder
/// holds every triple whose polarity vector is not a kept minterm.
class Fragmentation {
 public:
  Fragmentation() = default;
  Fragmentation(std::vector<SimplePredicate> predicates, std::vector<Fragment> fragments);

  const std::vector<SimplePredicate>& predicates() const { return predicates_; }
  const std::vector<Fragment>& fragments() const { return fragments_; }
  const Fragment& fragment(std::uint32_t id) const;
  const Fragment& remainder() const { return fragments_.back(); }
  std::uint32_t remainder_id() const { return fragments_.back().id; }

  Mask mask_of(const rdf::Term& s, const rdf::Term& p, const rdf::Term& o) const;
  std::uint32_t fragment_of(const rdf::Term& s, const rdf::Term& p, const rdf::Term& o) const;
  std::uint32_t fragment_of(const rdf::Triple& t, const rdf::Dictionary& dict) const;

  /// overlaps() against a fragment's minterm; the remainder is tested as the
  /// all-negative minterm.
  bool overlaps(std::uint32_t id, const workload::AnonPattern& pattern) const;
  /// Fragments that may hold triples matching the pattern. `stray_masks` are
  /// the non-zero polarity vectors currently present in the remainder
  /// (triples of minterms pruned at partition time or inserted later).
  std::vector<std::uint32_t> relevant_fragments(const workload::AnonPattern& pattern,
                                                const std::vector<Mask>& stray_masks = {}) const;
  bool is_kept(Mask mask) const { return mask != 0 && by_mask_.contains(mask); }

  /// `id | minterm | freq | size | load` table.
  std::string describe() const;
  std::string minterm_text(const Fragment& f) const;

  friend bool operator==(const Fragmentation& a, const Fragmentation& b) {
    return a.predicates_ == b.predicates_ && a.fragments_ == b.fragments_;
  }

 private:
  std::vector<SimplePredicate> predicates_;
  std::vector<Fragment> fragments_;
  std::unordered_map<Mask, std::uint32_t> by_mask_;
};

/// Builds fragments from kept minterms: s(m) from the sample scaled by
/// 1/fraction, f(m) from Φ overlaps, empty non-remainder fragments dropped,
/// ordered by load descending.
Fragmentation fragment_stats(const std::vector<SimplePredicate>& preds,
                             const std::vector<Mask>& minterms, const SampleMatrix& sample,
                             double fraction, const workload::PatternFrequencies& phi);

/// Multiset of (f, s) over non-empty fragments, sorted.
using Signature = std::vector<std::pair<std::uint64_t, std::uint64_t>>;

Signature signature(const std::vector<SimplePredicate>& preds, const rdf::TripleStore& sample,
                    const rdf::Dictionary& dict, const workload::PatternFrequencies& phi);

/// Reduces S to a complete and minimal subset under signature comparison.
std::vector<SimplePredicate> com_min(const std::vector<SimplePredicate>& preds,
                                     const rdf::TripleStore& sample, const rdf::Dictionary& dict,
                                     const workload::PatternFrequencies& phi);

struct PartitionOptions {
  std::uint64_t theta = 2;
  double sample_fraction = 0.1;
  std::uint64_t seed = 1;
};

/// The whole pipeline: Φ, S(QL), sample, COM_MIN, minterms, statistics.
Fragmentation partition(const rdf::TripleStore& store, const rdf::Dictionary& dict,
                        const workload::QueryLog& log, const PartitionOptions& options);

/// One fragment per property constant of the query log.
Fragmentation by_property_fragmentation(const rdf::TripleStore& store, const rdf::Dictionary& dict,
                                        const workload::QueryLog& log,
                                        const PartitionOptions& options);

}  // namespace partout::fragment
