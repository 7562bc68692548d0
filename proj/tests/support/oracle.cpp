#include "support/oracle.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

namespace partout::testing {

namespace {

struct Index {
  std::vector<rdf::Triple> all;
  std::unordered_map<rdf::TermId, std::vector<std::size_t>> by_s, by_p, by_o;

  explicit Index(const rdf::TripleStore& store) : all(store.triples()) {
    for (std::size_t i = 0; i < all.size(); ++i) {
      by_s[all[i].s].push_back(i);
      by_p[all[i].p].push_back(i);
      by_o[all[i].o].push_back(i);
    }
  }
};

struct Slot {
  bool is_var = false;
  std::size_t var = 0;
  rdf::TermId id = 0;  // 0 when the constant is absent from the dictionary
};

class BranchEval {
 public:
  BranchEval(const sparql::GraphPattern& branch, const Index& index, const rdf::Dictionary& dict)
      : branch_(branch), index_(index), dict_(dict) {
    vars_ = sparql::variables(branch.required);
    for (const auto& p : branch.required) {
      patterns_.push_back({slot(p.s), slot(p.p), slot(p.o)});
    }
    binding_.assign(vars_.size(), 0);
  }

  template <typename Emit>
  void run(Emit&& emit) {
    recurse(0, emit);
  }

  const std::vector<std::string>& vars() const { return vars_; }

 private:
  Slot slot(const sparql::PatternTerm& t) {
    Slot s;
    if (sparql::is_variable(t)) {
      s.is_var = true;
      s.var = std::find(vars_.begin(), vars_.end(), sparql::var_name(t)) - vars_.begin();
    } else {
      s.id = dict_.lookup(sparql::constant(t));
    }
    return s;
  }

  rdf::TermId value(const Slot& s) const { return s.is_var ? binding_[s.var] : s.id; }

  template <typename Emit>
  void recurse(std::size_t depth, Emit& emit) {
    if (depth == patterns_.size()) {
      for (const auto& f : branch_.filters) {
        auto v = std::find(vars_.begin(), vars_.end(), sparql::filter_var(f)) - vars_.begin();
        if (!sparql::evaluate(f, dict_.term(binding_[v]))) return;
      }
      emit(binding_);
      return;
    }
    const auto& pat = patterns_[depth];
    for (const Slot* s : {&pat[0], &pat[1], &pat[2]}) {
      if (!s->is_var && s->id == 0) return;
    }
    const std::vector<std::size_t>* candidates = nullptr;
    auto consider = [&](const Slot& s, const auto& map) {
      rdf::TermId v = value(s);
      if (v == 0) return;
      auto it = map.find(v);
      static const std::vector<std::size_t> kEmpty;
      const auto* list = it == map.end() ? &kEmpty : &it->second;
      if (!candidates || list->size() < candidates->size()) candidates = list;
    };
    consider(pat[0], index_.by_s);
    consider(pat[1], index_.by_p);
    consider(pat[2], index_.by_o);
    std::vector<std::size_t> everything;
    if (!candidates) {
      everything.resize(index_.all.size());
      for (std::size_t i = 0; i < everything.size(); ++i) everything[i] = i;
      candidates = &everything;
    }
    for (std::size_t i : *candidates) {
      const rdf::Triple& t = index_.all[i];
      rdf::TermId values[3] = {t.s, t.p, t.o};
      std::vector<std::size_t> bound_here;
      bool ok = true;
      for (int k = 0; k < 3 && ok; ++k) {
        const Slot& s = pat[k];
        if (!s.is_var) {
          ok = s.id == values[k];
        } else if (binding_[s.var] == 0) {
          binding_[s.var] = values[k];
          bound_here.push_back(s.var);
        } else {
          ok = binding_[s.var] == values[k];
        }
      }
      if (ok) recurse(depth + 1, emit);
      for (std::size_t v : bound_here) binding_[v] = 0;
    }
  }

  const sparql::GraphPattern& branch_;
  const Index& index_;
  const rdf::Dictionary& dict_;
  std::vector<std::string> vars_;
  std::vector<std::array<Slot, 3>> patterns_;
  std::vector<rdf::TermId> binding_;
};

}  // namespace

std::vector<Row> evaluate_centralized(const sparql::Query& query, const rdf::TripleStore& store,
                                      const rdf::Dictionary& dict) {
  Index index(store);
  auto out_vars = sparql::output_variables(query);
  std::vector<Row> rows;
  for (const auto& branch : query.branches) {
    BranchEval eval(branch, index, dict);
    std::vector<std::ptrdiff_t> pick;
    for (const auto& v : out_vars) {
      auto it = std::find(eval.vars().begin(), eval.vars().end(), v);
      pick.push_back(it == eval.vars().end() ? -1 : it - eval.vars().begin());
    }
    eval.run([&](const std::vector<rdf::TermId>& binding) {
      Row row;
      row.reserve(pick.size());
      for (auto k : pick) row.push_back(k < 0 ? 0 : binding[k]);
      rows.push_back(std::move(row));
    });
  }
  std::sort(rows.begin(), rows.end());
  return rows;
}

std::vector<std::uint64_t> overlap_sum_frequencies(const fragment::Fragmentation& frag, const rdf::TripleStore& store,
                                                   const rdf::Dictionary& dict,
                                                   const workload::PatternFrequencies& phi) {
  using rdf::Component;
  const auto& fragments = frag.fragments();
  std::vector<std::set<workload::AnonPattern>> hit(fragments.size());
  for (const auto& t : store.triples()) {
    const auto& s = dict.term(t.s);
    const auto& p = dict.term(t.p);
    const auto& o = dict.term(t.o);
    std::size_t home = fragments.size() - 1;
    for (std::size_t k = 0; k < fragments.size(); ++k) {
      const auto& f = fragments[k];
      if (f.remainder) continue;
      bool in = true;
      for (std::size_t i = 0; i < frag.predicates().size() && in; ++i) {
        const auto& pred = frag.predicates()[i];
        const auto& v = pred.component == Component::Subject ? s : pred.component == Component::Property ? p : o;
        in = pred.holds(v) == (((f.minterm >> i) & 1u) != 0);
      }
      if (in) {
        home = k;
        break;
      }
    }
    for (const auto& [pattern, fp] : phi) {
      if ((!pattern.s || *pattern.s == s) && (!pattern.p || *pattern.p == p) && (!pattern.o || *pattern.o == o)) {
        hit[home].insert(pattern);
      }
    }
  }
  std::vector<std::uint64_t> out(fragments.size(), 0);
  for (std::size_t i = 0; i < hit.size(); ++i) {
    for (const auto& pattern : hit[i]) out[i] += phi.at(pattern);
  }
  return out;
}

}  // namespace partout::testing
