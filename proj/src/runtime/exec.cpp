#include "partout/runtime/exec.hpp"

#include <algorithm>
#include <optional>
#include <unordered_map>

#include <fmt/format.h>

#include "partout/error.hpp"

namespace partout::runtime {

using plan::OpKind;
using plan::PlanOp;

namespace {

constexpr std::size_t kMissing = static_cast<std::size_t>(-1);

std::size_t index_of(const std::vector<std::string>& cols, const std::string& name) {
  auto it = std::find(cols.begin(), cols.end(), name);
  return it == cols.end() ? kMissing : static_cast<std::size_t>(it - cols.begin());
}

std::vector<std::size_t> indexes(const std::vector<std::string>& from, const std::vector<std::string>& names) {
  std::vector<std::size_t> out;
  for (const auto& n : names) {
    auto i = index_of(from, n);
    if (i == kMissing) throw PlanError("input lacks column ?" + n);
    out.push_back(i);
  }
  return out;
}

struct RowHash {
  std::size_t operator()(const Row& r) const noexcept {
    std::size_t h = 0;
    for (auto v : r) h = h * 0x9E3779B97F4A7C15ULL + std::hash<rdf::TermId>{}(v);
    return h;
  }
};

/// Where each output column comes from: left input, or right input when absent on the left.
struct JoinLayout {
  std::vector<std::pair<bool, std::size_t>> sources;

  JoinLayout(const std::vector<std::string>& out, const std::vector<std::string>& left,
             const std::vector<std::string>& right) {
    for (const auto& c : out) {
      if (auto i = index_of(left, c); i != kMissing) {
        sources.push_back({true, i});
      } else if (auto j = index_of(right, c); j != kMissing) {
        sources.push_back({false, j});
      } else {
        throw PlanError("join output column ?" + c + " comes from neither input");
      }
    }
  }

  void fill(Row& out, const Row& l, const Row& r) const {
    out.resize(sources.size());
    for (std::size_t i = 0; i < sources.size(); ++i) out[i] = sources[i].first ? l[sources[i].second] : r[sources[i].second];
  }
};

class RowsOp : public Operator {
 public:
  RowsOp(std::vector<std::string> cols, std::vector<Row> rows) : Operator(std::move(cols)), rows_(std::move(rows)) {}

  bool next(Row& row) override {
    if (pos_ >= rows_.size()) return false;
    row = rows_[pos_++];
    return true;
  }

 private:
  std::vector<Row> rows_;
  std::size_t pos_ = 0;
};

class ScanOp : public Operator {
 public:
  ScanOp(const PlanOp& op, const ExecContext& ctx) : Operator(op.columns), dict_(*ctx.dict) {
    rdf::IdPattern pattern;
    bool unknown = false;
    const sparql::PatternTerm* terms[3] = {&op.pattern.s, &op.pattern.p, &op.pattern.o};
    std::optional<rdf::TermId>* slots[3] = {&pattern.s, &pattern.p, &pattern.o};
    std::vector<std::string> names(3);
    for (int i = 0; i < 3; ++i) {
      if (sparql::is_variable(*terms[i])) {
        names[i] = sparql::var_name(*terms[i]);
        continue;
      }
      auto id = dict_.find(sparql::constant(*terms[i]));
      if (!id) unknown = true;
      *slots[i] = id.value_or(rdf::kUnassigned);
    }
    for (const auto& c : columns()) {
      for (int i = 0; i < 3; ++i) {
        if (names[i] == c) {
          out_.push_back(i);
          break;
        }
      }
    }
    for (int i = 0; i < 3; ++i) {
      for (int j = i + 1; j < 3; ++j) {
        if (!names[i].empty() && names[i] == names[j]) same_.push_back({i, j});
      }
    }
    for (const auto& f : op.filters) {
      for (int i = 0; i < 3; ++i) {
        if (names[i] == sparql::filter_var(f)) {
          filters_.push_back({i, f});
          break;
        }
      }
    }
    if (!unknown) triples_ = ctx.store->scan(pattern, op.order);
  }

  bool next(Row& row) override {
    while (pos_ < triples_.size()) {
      const auto& t = triples_[pos_++];
      rdf::TermId v[3] = {t.s, t.p, t.o};
      bool ok = true;
      for (auto [i, j] : same_) ok = ok && v[i] == v[j];
      for (const auto& [i, f] : filters_) ok = ok && sparql::evaluate(f, dict_.term(v[i]));
      if (!ok) continue;
      row.resize(out_.size());
      for (std::size_t k = 0; k < out_.size(); ++k) row[k] = v[out_[k]];
      return true;
    }
    return false;
  }

 private:
  const rdf::Dictionary& dict_;
  std::vector<rdf::Triple> triples_;
  std::size_t pos_ = 0;
  std::vector<int> out_;
  std::vector<std::pair<int, int>> same_;
  std::vector<std::pair<int, sparql::FilterExpr>> filters_;
};

/// One-row lookahead over an input.
class Peek {
 public:
  explicit Peek(OperatorPtr in) : in_(std::move(in)) { advance(); }

  bool has() const { return has_; }
  const Row& row() const { return row_; }
  void advance() { has_ = in_->next(row_); }
  const std::vector<std::string>& columns() const { return in_->columns(); }

 private:
  OperatorPtr in_;
  Row row_;
  bool has_ = false;
};

class MergeJoinOp : public Operator {
 public:
  MergeJoinOp(OperatorPtr left, OperatorPtr right, std::vector<std::string> vars, std::vector<std::string> cols)
      : Operator(std::move(cols)),
        layout_(columns(), left->columns(), right->columns()),
        left_(std::move(left)),
        right_(std::move(right)) {
    if (vars.empty()) throw PlanError("MergeJoin without join variable");
    lk_ = indexes(left_.columns(), vars);
    rk_ = indexes(right_.columns(), vars);
  }

  bool next(Row& row) override {
    while (true) {
      while (i_ < lg_.size()) {
        const Row& l = lg_[i_];
        while (j_ < rg_.size()) {
          const Row& r = rg_[j_++];
          bool ok = true;
          for (std::size_t k = 1; k < lk_.size() && ok; ++k) ok = l[lk_[k]] == r[rk_[k]];
          if (ok) {
            layout_.fill(row, l, r);
            return true;
          }
        }
        ++i_;
        j_ = 0;
      }
      if (!load_groups()) return false;
    }
  }

 private:
  bool load_groups() {
    lg_.clear();
    rg_.clear();
    i_ = j_ = 0;
    while (left_.has() && right_.has()) {
      auto a = left_.row()[lk_[0]], b = right_.row()[rk_[0]];
      if (a < b) {
        left_.advance();
      } else if (b < a) {
        right_.advance();
      } else {
        while (left_.has() && left_.row()[lk_[0]] == a) {
          lg_.push_back(left_.row());
          left_.advance();
        }
        while (right_.has() && right_.row()[rk_[0]] == a) {
          rg_.push_back(right_.row());
          right_.advance();
        }
        return true;
      }
    }
    return false;
  }

  JoinLayout layout_;
  Peek left_, right_;
  std::vector<std::size_t> lk_, rk_;
  std::vector<Row> lg_, rg_;
  std::size_t i_ = 0, j_ = 0;
};

class HashJoinOp : public Operator {
 public:
  HashJoinOp(OperatorPtr build, OperatorPtr probe, std::vector<std::string> vars, std::vector<std::string> cols)
      : Operator(std::move(cols)),
        layout_(columns(), build->columns(), probe->columns()),
        build_(std::move(build)),
        probe_(std::move(probe)) {
    bk_ = indexes(build_->columns(), vars);
    pk_ = indexes(probe_->columns(), vars);
  }

  bool next(Row& row) override {
    if (!built_) {
      Row r;
      while (build_->next(r)) table_.emplace(key(r, bk_), r);
      built_ = true;
    }
    while (true) {
      if (match_ != end_) {
        layout_.fill(row, match_->second, probe_row_);
        ++match_;
        return true;
      }
      if (!probe_->next(probe_row_)) return false;
      std::tie(match_, end_) = table_.equal_range(key(probe_row_, pk_));
    }
  }

 private:
  static Row key(const Row& r, const std::vector<std::size_t>& idx) {
    Row k;
    k.reserve(idx.size());
    for (auto i : idx) k.push_back(r[i]);
    return k;
  }

  using Table = std::unordered_multimap<Row, Row, RowHash>;
  JoinLayout layout_;
  OperatorPtr build_, probe_;
  std::vector<std::size_t> bk_, pk_;
  Table table_;
  bool built_ = false;
  Row probe_row_;
  Table::const_iterator match_{}, end_{};
};

class MergeUnionOp : public Operator {
 public:
  MergeUnionOp(std::vector<OperatorPtr> inputs, std::vector<std::string> sorted_by, std::vector<std::string> cols)
      : Operator(std::move(cols)) {
    for (auto& in : inputs) {
      map_.push_back(indexes(in->columns(), columns()));
      keys_.push_back(indexes(in->columns(), sorted_by));
      inputs_.emplace_back(std::move(in));
    }
  }

  bool next(Row& row) override {
    std::size_t best = kMissing;
    for (std::size_t i = 0; i < inputs_.size(); ++i) {
      if (!inputs_[i].has()) continue;
      if (best == kMissing || less(i, best)) best = i;
    }
    if (best == kMissing) return false;
    const Row& r = inputs_[best].row();
    row.resize(map_[best].size());
    for (std::size_t k = 0; k < row.size(); ++k) row[k] = r[map_[best][k]];
    inputs_[best].advance();
    return true;
  }

 private:
  bool less(std::size_t a, std::size_t b) const {
    const Row& ra = inputs_[a].row();
    const Row& rb = inputs_[b].row();
    for (std::size_t k = 0; k < keys_[a].size(); ++k) {
      auto x = ra[keys_[a][k]], y = rb[keys_[b][k]];
      if (x != y) return x < y;
    }
    return false;
  }

  std::vector<Peek> inputs_;
  std::vector<std::vector<std::size_t>> map_, keys_;
};

class SortOp : public Operator {
 public:
  SortOp(OperatorPtr in, const std::vector<std::string>& vars, std::vector<std::string> cols)
      : Operator(std::move(cols)), in_(std::move(in)) {
    keys_ = indexes(in_->columns(), vars);
    map_ = indexes(in_->columns(), columns());
  }

  bool next(Row& row) override {
    if (!sorted_) {
      rows_ = drain(*in_);
      std::stable_sort(rows_.begin(), rows_.end(), [&](const Row& a, const Row& b) {
        for (auto k : keys_) {
          if (a[k] != b[k]) return a[k] < b[k];
        }
        return false;
      });
      sorted_ = true;
    }
    if (pos_ >= rows_.size()) return false;
    const Row& r = rows_[pos_++];
    row.resize(map_.size());
    for (std::size_t k = 0; k < map_.size(); ++k) row[k] = r[map_[k]];
    return true;
  }

 private:
  OperatorPtr in_;
  std::vector<std::size_t> keys_, map_;
  std::vector<Row> rows_;
  std::size_t pos_ = 0;
  bool sorted_ = false;
};

/// Reorders columns; columns absent from the input are unbound (0).
class ProjectOp : public Operator {
 public:
  ProjectOp(std::vector<OperatorPtr> inputs, std::vector<std::string> cols) : Operator(std::move(cols)) {
    for (auto& in : inputs) {
      std::vector<std::size_t> m;
      for (const auto& c : columns()) m.push_back(index_of(in->columns(), c));
      map_.push_back(std::move(m));
      inputs_.push_back(std::move(in));
    }
  }

  bool next(Row& row) override {
    while (cur_ < inputs_.size()) {
      if (inputs_[cur_]->next(buf_)) {
        row.resize(map_[cur_].size());
        for (std::size_t k = 0; k < row.size(); ++k) {
          row[k] = map_[cur_][k] == kMissing ? rdf::kUnassigned : buf_[map_[cur_][k]];
        }
        return true;
      }
      ++cur_;
    }
    return false;
  }

 private:
  std::vector<OperatorPtr> inputs_;
  std::vector<std::vector<std::size_t>> map_;
  std::size_t cur_ = 0;
  Row buf_;
};

class EmptyOp : public Operator {
 public:
  using Operator::Operator;
  bool next(Row&) override { return false; }
};

}  // namespace

OperatorPtr rows_operator(std::vector<std::string> columns, std::vector<Row> rows) {
  return std::make_unique<RowsOp>(std::move(columns), std::move(rows));
}

OperatorPtr merge_join(OperatorPtr left, OperatorPtr right, std::vector<std::string> vars,
                       std::vector<std::string> columns) {
  return std::make_unique<MergeJoinOp>(std::move(left), std::move(right), std::move(vars), std::move(columns));
}

OperatorPtr hash_join(OperatorPtr build, OperatorPtr probe, std::vector<std::string> vars,
                      std::vector<std::string> columns) {
  return std::make_unique<HashJoinOp>(std::move(build), std::move(probe), std::move(vars), std::move(columns));
}

OperatorPtr merge_union(std::vector<OperatorPtr> inputs, std::vector<std::string> sorted_by,
                        std::vector<std::string> columns) {
  return std::make_unique<MergeUnionOp>(std::move(inputs), std::move(sorted_by), std::move(columns));
}

OperatorPtr build_operator(const PlanOp& op, const ExecContext& ctx) {
  auto child = [&](std::size_t i) {
    if (i >= op.children.size()) throw PlanError(fmt::format("{} operator lacks input {}", plan::kind_name(op.kind), i));
    return build_operator(op.children[i], ctx);
  };
  auto all_children = [&] {
    std::vector<OperatorPtr> out;
    for (const auto& c : op.children) out.push_back(build_operator(c, ctx));
    return out;
  };
  switch (op.kind) {
    case OpKind::IndexScan:
      if (!ctx.store || !ctx.dict) throw PlanError("scan without a store");
      return std::make_unique<ScanOp>(op, ctx);
    case OpKind::MergeJoin:
      return merge_join(child(0), child(1), op.vars, op.columns);
    case OpKind::HashJoin:
      return hash_join(child(0), child(1), op.vars, op.columns);
    case OpKind::BMU:
      return merge_union(all_children(), op.sorted_by, op.columns);
    case OpKind::Sort:
      return std::make_unique<SortOp>(child(0), op.vars, op.columns);
    case OpKind::Project:
    case OpKind::Union:
      return std::make_unique<ProjectOp>(all_children(), op.columns);
    case OpKind::Empty:
      return std::make_unique<EmptyOp>(op.columns);
    case OpKind::Fetch:
      if (!ctx.fetch) throw PlanError("Fetch operator outside a deployment");
      return ctx.fetch(op);
  }
  throw PlanError("unknown operator kind");
}

std::vector<Row> drain(Operator& op) {
  std::vector<Row> out;
  Row r;
  while (op.next(r)) out.push_back(r);
  return out;
}

std::vector<Row> run_local(const PlanOp& plan, const rdf::TripleStore& store, const rdf::Dictionary& dict) {
  ExecContext ctx{&store, &dict, {}};
  auto op = build_operator(plan, ctx);
  return drain(*op);
}

}  // namespace partout::runtime
