#include "partout/fragment/fragmentation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "partout/error.hpp"

namespace partout::fragment {

using rdf::Component;
using rdf::CompareOp;

SimplePredicate SimplePredicate::compare(Component c, CompareOp op, rdf::Term constant) {
  SimplePredicate p;
  p.component = c;
  p.op = op;
  p.constant = std::move(constant);
  return p;
}

SimplePredicate SimplePredicate::function(Component c, FuncKind f) {
  SimplePredicate p;
  p.component = c;
  p.is_func = true;
  p.func = f;
  return p;
}

bool SimplePredicate::holds(const rdf::Term& value) const {
  if (is_func) return func == FuncKind::IsIri ? value.is_iri() : value.is_literal();
  return rdf::compare(value, op, constant);
}

namespace {

int component_rank(Component c) {
  switch (c) {
    case Component::Property: return 0;
    case Component::Object: return 1;
    case Component::Subject: return 2;
  }
  return 3;
}

const char* component_name(Component c) {
  switch (c) {
    case Component::Subject: return "subj";
    case Component::Property: return "prop";
    case Component::Object: return "obj";
  }
  return "?";
}

}  // namespace

bool operator<(const SimplePredicate& a, const SimplePredicate& b) {
  int ra = component_rank(a.component), rb = component_rank(b.component);
  if (ra != rb) return ra < rb;
  return to_string(a) < to_string(b);
}

std::string to_string(const SimplePredicate& p) {
  if (p.is_func) {
    return std::string(p.func == FuncKind::IsIri ? "isIRI(" : "isLiteral(") +
           component_name(p.component) + ")";
  }
  return std::string(component_name(p.component)) + std::string(rdf::op_symbol(p.op)) +
         rdf::to_ntriples(p.constant);
}

namespace {

template <typename Key>
struct Interval {
  std::optional<Key> lo, hi;
  bool lo_strict = false, hi_strict = false;

  void lower(const Key& k, bool strict) {
    if (!lo || k > *lo || (k == *lo && strict)) {
      lo = k;
      lo_strict = strict;
    }
  }
  void upper(const Key& k, bool strict) {
    if (!hi || k < *hi || (k == *hi && strict)) {
      hi = k;
      hi_strict = strict;
    }
  }
  void apply(CompareOp op, const Key& k) {
    switch (op) {
      case CompareOp::Less: upper(k, true); break;
      case CompareOp::LessEq: upper(k, false); break;
      case CompareOp::Greater: lower(k, true); break;
      case CompareOp::GreaterEq: lower(k, false); break;
      case CompareOp::Equal: break;
    }
  }
  bool empty() const {
    if (!lo || !hi) return false;
    return *lo > *hi || (*lo == *hi && (lo_strict || hi_strict));
  }
};

CompareOp negate(CompareOp op) {
  switch (op) {
    case CompareOp::Less: return CompareOp::GreaterEq;
    case CompareOp::LessEq: return CompareOp::Greater;
    case CompareOp::Greater: return CompareOp::LessEq;
    case CompareOp::GreaterEq: return CompareOp::Less;
    case CompareOp::Equal: return CompareOp::Equal;
  }
  return op;
}

template <typename Key, typename KeyFn>
bool interval_empty(const std::vector<const Literal*>& ordering, rdf::ValueCategory cat, KeyFn key) {
  Interval<Key> range;
  for (const Literal* l : ordering) {
    if (rdf::category(l->predicate->constant) != cat) continue;
    CompareOp op = l->positive ? l->predicate->op : negate(l->predicate->op);
    range.apply(op, key(l->predicate->constant));
  }
  return range.empty();
}

bool component_satisfiable(Component comp, const std::vector<const Literal*>& lits) {
  // A positive equality pins the value; everything else is then decidable.
  const rdf::Term* pinned = nullptr;
  for (const Literal* l : lits) {
    const SimplePredicate& p = *l->predicate;
    if (p.is_func || p.op != CompareOp::Equal || !l->positive) continue;
    if (pinned && *pinned != p.constant) return false;
    pinned = &p.constant;
  }
  if (pinned) {
    if (comp != Component::Object && pinned->is_literal()) return false;
    for (const Literal* l : lits) {
      if (l->predicate->holds(*pinned) != l->positive) return false;
    }
    return true;
  }

  bool iri_pos = false, iri_neg = false, lit_pos = false, lit_neg = false;
  for (const Literal* l : lits) {
    if (!l->predicate->is_func) continue;
    bool is_iri = l->predicate->func == FuncKind::IsIri;
    (is_iri ? (l->positive ? iri_pos : iri_neg) : (l->positive ? lit_pos : lit_neg)) = true;
  }
  if ((iri_pos && iri_neg) || (lit_pos && lit_neg)) return false;
  if (iri_pos && lit_pos) return false;
  if (iri_neg && lit_neg) return false;
  if (comp != Component::Object && (iri_neg || lit_pos)) return false;

  std::vector<const Literal*> ordering;
  std::optional<rdf::ValueCategory> forced;
  for (const Literal* l : lits) {
    const SimplePredicate& p = *l->predicate;
    if (p.is_func || p.op == CompareOp::Equal) continue;
    ordering.push_back(l);
    if (!l->positive) continue;
    // A true ordering comparison implies the value shares the constant's category.
    auto cat = rdf::category(p.constant);
    if (forced && *forced != cat) return false;
    forced = cat;
  }
  if (!forced) return true;
  switch (*forced) {
    case rdf::ValueCategory::Numeric:
      return !interval_empty<double>(ordering, *forced,
                                     [](const rdf::Term& t) { return *rdf::numeric_value(t); });
    case rdf::ValueCategory::String:
      return !interval_empty<std::string>(
          ordering, *forced, [](const rdf::Term& t) { return std::string(rdf::value_text(t)); });
    case rdf::ValueCategory::Iri:
      return !interval_empty<std::string>(ordering, *forced,
                                          [](const rdf::Term& t) { return t.lexical; });
  }
  return true;
}

}  // namespace

bool satisfiable(const std::vector<Literal>& conjunction) {
  std::array<std::vector<const Literal*>, 3> by_component;
  for (const Literal& l : conjunction) {
    by_component[static_cast<std::size_t>(l.predicate->component)].push_back(&l);
  }
  for (std::size_t c = 0; c < 3; ++c) {
    if (!component_satisfiable(static_cast<Component>(c), by_component[c])) return false;
  }
  return true;
}

namespace {

std::vector<Literal> literals(const std::vector<SimplePredicate>& preds, Mask mask, std::size_t len) {
  std::vector<Literal> out;
  out.reserve(len + 3);
  for (std::size_t i = 0; i < len; ++i) out.push_back({&preds[i], ((mask >> i) & 1u) != 0});
  return out;
}

struct PatternConstraints {
  std::vector<SimplePredicate> equalities;

  explicit PatternConstraints(const workload::AnonPattern& p) {
    if (p.s) equalities.push_back(SimplePredicate::compare(Component::Subject, CompareOp::Equal, *p.s));
    if (p.p) equalities.push_back(SimplePredicate::compare(Component::Property, CompareOp::Equal, *p.p));
    if (p.o) equalities.push_back(SimplePredicate::compare(Component::Object, CompareOp::Equal, *p.o));
  }
  void append_to(std::vector<Literal>& lits) const {
    for (const auto& e : equalities) lits.push_back({&e, true});
  }
};

}  // namespace

bool satisfiable(const std::vector<SimplePredicate>& preds, Mask mask, std::size_t prefix_len) {
  return satisfiable(literals(preds, mask, prefix_len));
}

std::vector<SimplePredicate> extract_simple_predicates(const workload::PatternFrequencies& phi,
                                                       const workload::QueryLog& normalized_log) {
  std::set<std::string> seen;
  std::vector<SimplePredicate> out;
  auto add = [&](SimplePredicate p) {
    if (seen.insert(to_string(p)).second) out.push_back(std::move(p));
  };
  for (const auto& [pattern, f] : phi) {
    if (pattern.s) add(SimplePredicate::compare(Component::Subject, CompareOp::Equal, *pattern.s));
    if (pattern.p) add(SimplePredicate::compare(Component::Property, CompareOp::Equal, *pattern.p));
    if (pattern.o) add(SimplePredicate::compare(Component::Object, CompareOp::Equal, *pattern.o));
  }
  for (const auto& entry : normalized_log) {
    for (const auto& branch : entry.query.branches) {
      std::vector<sparql::TriplePattern> all = branch.required;
      all.insert(all.end(), branch.optional.begin(), branch.optional.end());
      for (const auto& filter : branch.filters) {
        const std::string& var = sparql::filter_var(filter);
        for (const auto& tp : all) {
          const sparql::PatternTerm* terms[3] = {&tp.s, &tp.p, &tp.o};
          for (std::size_t c = 0; c < 3; ++c) {
            if (!sparql::is_variable(*terms[c]) || sparql::var_name(*terms[c]) != var) continue;
            auto comp = static_cast<Component>(c);
            if (const auto* cmp = std::get_if<sparql::Compare>(&filter)) {
              if (comp == Component::Property &&
                  (cmp->op != CompareOp::Equal || !cmp->constant.is_iri())) {
                continue;
              }
              add(SimplePredicate::compare(comp, cmp->op, cmp->constant));
            } else if (std::holds_alternative<sparql::IsIri>(filter)) {
              add(SimplePredicate::function(comp, FuncKind::IsIri));
            } else {
              add(SimplePredicate::function(comp, FuncKind::IsLiteral));
            }
          }
        }
      }
    }
  }
  std::stable_sort(out.begin(), out.end());
  return out;
}

SampleMatrix::SampleMatrix(const std::vector<SimplePredicate>& preds, const rdf::TripleStore& sample,
                           const rdf::Dictionary& dict) {
  if (preds.size() > 32) throw Error(fmt::format("too many simple predicates: {}", preds.size()));
  // Predicate bits depend on one component only, so cache them per term id.
  std::array<std::unordered_map<rdf::TermId, Mask>, 3> cache;
  auto bits = [&](Component comp, rdf::TermId id) {
    auto& slot = cache[static_cast<std::size_t>(comp)];
    if (auto it = slot.find(id); it != slot.end()) return it->second;
    const rdf::Term& term = dict.term(id);
    Mask m = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      if (preds[i].component == comp && preds[i].holds(term)) m |= Mask{1} << i;
    }
    slot.emplace(id, m);
    return m;
  };
  for (const auto& t : sample.triples()) {
    Mask m = bits(Component::Subject, t.s) | bits(Component::Property, t.p) |
             bits(Component::Object, t.o);
    ++counts_[m];
    ++triples_;
  }
}

std::uint64_t SampleMatrix::count(Mask mask) const {
  auto it = counts_.find(mask);
  return it == counts_.end() ? 0 : it->second;
}

SampleMatrix SampleMatrix::project(const std::vector<std::size_t>& subset) const {
  SampleMatrix out;
  out.triples_ = triples_;
  for (const auto& [mask, n] : counts_) {
    Mask m = 0;
    for (std::size_t j = 0; j < subset.size(); ++j) {
      if ((mask >> subset[j]) & 1u) m |= Mask{1} << j;
    }
    out.counts_[m] += n;
  }
  return out;
}

std::vector<Mask> generate_minterms(const std::vector<SimplePredicate>& preds,
                                    const SampleMatrix* sample) {
  if (preds.size() > kMaxPredicates) {
    throw Error(fmt::format("too many simple predicates: {} (limit {})", preds.size(), kMaxPredicates));
  }
  std::vector<Mask> out;
  std::vector<Mask> seen;
  if (sample) {
    for (const auto& [mask, n] : sample->mask_counts()) seen.push_back(mask);
  }
  const std::size_t n = preds.size();
  std::vector<Literal> lits;
  lits.reserve(n);
  // Depth-first refinement; `candidates` are the sample masks agreeing with the prefix.
  auto refine = [&](auto&& self, std::size_t depth, Mask mask, const std::vector<Mask>& candidates) -> void {
    if (depth == n) {
      out.push_back(mask);
      return;
    }
    for (bool positive : {true, false}) {
      Mask child = positive ? (mask | (Mask{1} << depth)) : mask;
      lits.push_back({&preds[depth], positive});
      bool ok = satisfiable(lits);
      std::vector<Mask> next;
      if (ok && sample) {
        for (Mask m : candidates) {
          if ((((m >> depth) & 1u) != 0) == positive) next.push_back(m);
        }
        ok = !next.empty() || child == 0;
      }
      if (ok) self(self, depth + 1, child, next);
      lits.pop_back();
    }
  };
  refine(refine, 0, 0, seen);
  if (std::find(out.begin(), out.end(), Mask{0}) == out.end()) out.push_back(0);
  return out;
}

bool overlaps(const std::vector<SimplePredicate>& preds, Mask minterm,
              const workload::AnonPattern& pattern) {
  auto lits = literals(preds, minterm, preds.size());
  PatternConstraints pc(pattern);
  pc.append_to(lits);
  return satisfiable(lits);
}

Fragmentation::Fragmentation(std::vector<SimplePredicate> predicates, std::vector<Fragment> fragments)
    : predicates_(std::move(predicates)), fragments_(std::move(fragments)) {
  if (fragments_.empty() || !fragments_.back().remainder) {
    throw FormatError("fragmentation must end with the remainder fragment");
  }
  for (std::size_t i = 0; i < fragments_.size(); ++i) {
    if (fragments_[i].id != i + 1) throw FormatError("fragment ids must be 1..n in order");
    if (fragments_[i].remainder != (i + 1 == fragments_.size())) {
      throw FormatError("exactly the last fragment must be the remainder");
    }
    if (!fragments_[i].remainder) {
      if (fragments_[i].minterm == 0) throw FormatError("all-negative minterm outside the remainder");
      by_mask_.emplace(fragments_[i].minterm, fragments_[i].id);
    }
  }
}

const Fragment& Fragmentation::fragment(std::uint32_t id) const {
  if (id == 0 || id > fragments_.size()) throw std::out_of_range(fmt::format("no fragment {}", id));
  return fragments_[id - 1];
}

Mask Fragmentation::mask_of(const rdf::Term& s, const rdf::Term& p, const rdf::Term& o) const {
  Mask m = 0;
  for (std::size_t i = 0; i < predicates_.size(); ++i) {
    const auto& pred = predicates_[i];
    const rdf::Term& value = pred.component == Component::Subject    ? s
                             : pred.component == Component::Property ? p
                                                                     : o;
    if (pred.holds(value)) m |= Mask{1} << i;
  }
  return m;
}

std::uint32_t Fragmentation::fragment_of(const rdf::Term& s, const rdf::Term& p,
                                         const rdf::Term& o) const {
  Mask m = mask_of(s, p, o);
  if (m != 0) {
    if (auto it = by_mask_.find(m); it != by_mask_.end()) return it->second;
  }
  return remainder_id();
}

std::uint32_t Fragmentation::fragment_of(const rdf::Triple& t, const rdf::Dictionary& dict) const {
  return fragment_of(dict.term(t.s), dict.term(t.p), dict.term(t.o));
}

bool Fragmentation::overlaps(std::uint32_t id, const workload::AnonPattern& pattern) const {
  return fragment::overlaps(predicates_, fragment(id).minterm, pattern);
}

std::vector<std::uint32_t> Fragmentation::relevant_fragments(const workload::AnonPattern& pattern,
                                                             const std::vector<Mask>& stray_masks) const {
  std::vector<std::uint32_t> out;
  for (const auto& f : fragments_) {
    if (f.remainder) continue;
    if (overlaps(f.id, pattern)) out.push_back(f.id);
  }
  bool remainder = fragment::overlaps(predicates_, 0, pattern);
  for (Mask m : stray_masks) {
    if (remainder) break;
    remainder = fragment::overlaps(predicates_, m, pattern);
  }
  if (remainder) out.push_back(remainder_id());
  return out;
}

std::string Fragmentation::minterm_text(const Fragment& f) const {
  std::string positive;
  for (std::size_t i = 0; i < predicates_.size(); ++i) {
    if (((f.minterm >> i) & 1u) == 0) continue;
    positive += to_string(predicates_[i]) + " ∧ ";
  }
  if (f.remainder) return "ζ (remainder)";
  return positive + "ζ";
}

std::string Fragmentation::describe() const {
  std::ostringstream out;
  out << "id | minterm | freq | size | load\n";
  for (const auto& f : fragments_) {
    out << f.id << " | " << minterm_text(f) << " | " << f.freq << " | " << f.size << " | "
        << f.load() << '\n';
  }
  return out.str();
}

Fragmentation fragment_stats(const std::vector<SimplePredicate>& preds,
                             const std::vector<Mask>& minterms, const SampleMatrix& sample,
                             double fraction, const workload::PatternFrequencies& phi) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw std::invalid_argument("sample fraction must be in (0, 1]");
  auto scale = [&](std::uint64_t n) {
    return static_cast<std::uint64_t>(std::llround(static_cast<double>(n) / fraction));
  };
  auto freq = [&](Mask m) {
    std::uint64_t f = 0;
    for (const auto& [pattern, fp] : phi) {
      if (overlaps(preds, m, pattern)) f += fp;
    }
    return f;
  };
  std::vector<Fragment> kept;
  std::uint64_t covered = 0;
  for (Mask m : minterms) {
    if (m == 0) continue;
    std::uint64_t n = sample.count(m);
    if (n == 0) continue;
    covered += n;
    Fragment f;
    f.minterm = m;
    f.size = scale(n);
    f.freq = freq(m);
    kept.push_back(f);
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const Fragment& a, const Fragment& b) { return a.load() > b.load(); });
  Fragment rest;
  rest.remainder = true;
  rest.minterm = 0;
  rest.size = scale(sample.triple_count() - covered);
  rest.freq = freq(0);
  kept.push_back(rest);
  for (std::size_t i = 0; i < kept.size(); ++i) kept[i].id = static_cast<std::uint32_t>(i + 1);
  return Fragmentation(preds, std::move(kept));
}

namespace {

Signature signature_of(const std::vector<SimplePredicate>& preds, const SampleMatrix& sample,
                       const workload::PatternFrequencies& phi) {
  auto minterms = generate_minterms(preds, &sample);
  auto frag = fragment_stats(preds, minterms, sample, 1.0, phi);
  Signature sig;
  for (const auto& f : frag.fragments()) {
    if (f.size > 0) sig.emplace_back(f.freq, f.size);
  }
  std::sort(sig.begin(), sig.end());
  return sig;
}

std::vector<std::uint64_t> loads(const Signature& sig) {
  std::vector<std::uint64_t> out;
  for (const auto& [f, s] : sig) out.push_back(f * s);
  std::sort(out.rbegin(), out.rend());
  return out;
}

double load_distance(const Signature& a, const Signature& b) {
  auto la = loads(a), lb = loads(b);
  std::size_t n = std::max(la.size(), lb.size());
  la.resize(n, 0);
  lb.resize(n, 0);
  double d = 0;
  for (std::size_t i = 0; i < n; ++i) {
    d += std::abs(static_cast<double>(la[i]) - static_cast<double>(lb[i]));
  }
  return d;
}

class SignatureOracle {
 public:
  SignatureOracle(const std::vector<SimplePredicate>& preds, const SampleMatrix& full,
                  const workload::PatternFrequencies& phi)
      : preds_(preds), full_(full), phi_(phi) {}

  const Signature& operator()(const std::vector<std::size_t>& subset) {
    if (auto it = memo_.find(subset); it != memo_.end()) return it->second;
    std::vector<SimplePredicate> chosen;
    for (std::size_t i : subset) chosen.push_back(preds_[i]);
    auto sig = signature_of(chosen, full_.project(subset), phi_);
    return memo_.emplace(subset, std::move(sig)).first->second;
  }

 private:
  const std::vector<SimplePredicate>& preds_;
  const SampleMatrix& full_;
  const workload::PatternFrequencies& phi_;
  std::map<std::vector<std::size_t>, Signature> memo_;
};

std::vector<std::size_t> with(std::vector<std::size_t> s, std::size_t i) {
  s.insert(std::upper_bound(s.begin(), s.end(), i), i);
  return s;
}

std::vector<std::size_t> without(std::vector<std::size_t> s, std::size_t i) {
  s.erase(std::find(s.begin(), s.end(), i));
  return s;
}

}  // namespace

Signature signature(const std::vector<SimplePredicate>& preds, const rdf::TripleStore& sample,
                    const rdf::Dictionary& dict, const workload::PatternFrequencies& phi) {
  return signature_of(preds, SampleMatrix(preds, sample, dict), phi);
}

std::vector<SimplePredicate> com_min(const std::vector<SimplePredicate>& input,
                                     const rdf::TripleStore& sample, const rdf::Dictionary& dict,
                                     const workload::PatternFrequencies& phi) {
  std::vector<SimplePredicate> preds = input;
  std::stable_sort(preds.begin(), preds.end());
  if (preds.empty()) return preds;
  if (preds.size() > 32) {
    throw Error(fmt::format("too many simple predicates for reduction: {}", preds.size()));
  }
  SampleMatrix full(preds, sample, dict);
  SignatureOracle sig(preds, full, phi);

  const Signature& none = sig({});
  std::size_t start = 0;
  double best = -1;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    double d = load_distance(sig({i}), none);
    if (d > best) {
      best = d;
      start = i;
    }
  }

  std::vector<std::size_t> current{start};
  std::set<std::vector<std::size_t>> visited;
  while (visited.insert(current).second) {
    bool changed = false;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      if (std::binary_search(current.begin(), current.end(), i)) continue;
      auto next = with(current, i);
      if (sig(next) != sig(current)) {
        current = std::move(next);
        changed = true;
      }
    }
    for (std::size_t k = 0; k < current.size();) {
      auto next = without(current, current[k]);
      if (sig(next) == sig(current)) {
        current = std::move(next);
        changed = true;
      } else {
        ++k;
      }
    }
    if (!changed) break;
  }
  std::vector<SimplePredicate> out;
  for (std::size_t i : current) out.push_back(preds[i]);
  return out;
}

Fragmentation partition(const rdf::TripleStore& store, const rdf::Dictionary& dict,
                        const workload::QueryLog& log, const PartitionOptions& options) {
  auto phi = workload::normalize_and_anonymize(log, options.theta);
  auto preds = extract_simple_predicates(phi, workload::normalize(log, options.theta));
  rdf::TripleStore sample = options.sample_fraction >= 1.0
                                ? store
                                : store.sample(options.sample_fraction, options.seed);
  auto reduced = com_min(preds, sample, dict, phi);
  if (reduced.size() > kMaxPredicates) {
    throw Error(fmt::format("too many simple predicates after reduction: {} (limit {})",
                            reduced.size(), kMaxPredicates));
  }
  SampleMatrix matrix(reduced, sample, dict);
  auto minterms = generate_minterms(reduced, &matrix);
  return fragment_stats(reduced, minterms, matrix, options.sample_fraction, phi);
}

Fragmentation by_property_fragmentation(const rdf::TripleStore& store, const rdf::Dictionary& dict,
                                        const workload::QueryLog& log,
                                        const PartitionOptions& options) {
  auto phi = workload::normalize_and_anonymize(log, options.theta);
  std::set<rdf::Term> properties;
  for (const auto& [pattern, f] : phi) {
    if (pattern.p) properties.insert(*pattern.p);
  }
  std::vector<SimplePredicate> preds;
  for (const auto& p : properties) {
    preds.push_back(SimplePredicate::compare(Component::Property, CompareOp::Equal, p));
  }
  std::stable_sort(preds.begin(), preds.end());
  if (preds.size() > kMaxPredicates) {
    throw Error(fmt::format("too many properties for by-property fragmentation: {}", preds.size()));
  }
  rdf::TripleStore sample = options.sample_fraction >= 1.0
                                ? store
                                : store.sample(options.sample_fraction, options.seed);
  SampleMatrix matrix(preds, sample, dict);
  auto minterms = generate_minterms(preds, &matrix);
  return fragment_stats(preds, minterms, matrix, options.sample_fraction, phi);
}

}  // namespace partout::fragment
