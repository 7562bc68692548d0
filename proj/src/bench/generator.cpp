#include "partout/bench/generator.hpp"

#include <algorithm>
#include <ostream>
#include <random>
#include <map>
#include <set>

#include <fmt/format.h>

#include "partout/error.hpp"
#include "partout/rdf/term.hpp"

namespace partout::bench {

namespace {

using rdf::kRdfType;
using rdf::kXsdInteger;

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void iri(std::string_view s, std::string_view p, std::string_view o) {
    emit(fmt::format("<{}{}> <{}{}> <{}{}> .\n", kSynth, s, kSynth, p, kSynth, o));
  }
  void type(std::string_view s, std::string_view cls) {
    emit(fmt::format("<{}{}> <{}> <{}{}> .\n", kSynth, s, kRdfType, kSynth, cls));
  }
  void text(std::string_view s, std::string_view p, std::string_view value) {
    emit(fmt::format("<{}{}> <{}{}> \"{}\" .\n", kSynth, s, kSynth, p, value));
  }
  void number(std::string_view s, std::string_view p, std::uint64_t value) {
    emit(fmt::format("<{}{}> <{}{}> \"{}\"^^<{}> .\n", kSynth, s, kSynth, p, value, kXsdInteger));
  }
  std::uint64_t count() const { return count_; }

 private:
  void emit(const std::string& line) {
    out_ << line;
    ++count_;
  }

  std::ostream& out_;
  std::uint64_t count_ = 0;
};

}  // namespace

std::uint64_t write_synthetic_dataset(std::ostream& out, std::uint64_t target_triples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](std::uint64_t lo, std::uint64_t hi) { return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng); };
  auto chance = [&](double p) { return std::bernoulli_distribution(p)(rng); };

  std::uint64_t people_hint = std::max<std::uint64_t>(target_triples / 8, 20);
  std::uint64_t countries = 20;
  std::uint64_t cities = std::max<std::uint64_t>(people_hint / 100, 10);
  std::uint64_t orgs = std::max<std::uint64_t>(people_hint / 20, 10);

  Writer w(out);
  for (std::uint64_t c = 0; c < countries; ++c) {
    auto id = fmt::format("country{}", c);
    w.type(id, "Country");
    w.text(id, "name", fmt::format("Country {}", c));
  }
  for (std::uint64_t c = 0; c < cities; ++c) {
    auto id = fmt::format("city{}", c);
    w.type(id, "City");
    w.text(id, "name", fmt::format("City {}", c));
    w.iri(id, "partOf", fmt::format("country{}", uniform(0, countries - 1)));
    w.number(id, "population", uniform(1000, 5'000'000));
  }
  for (std::uint64_t o = 0; o < orgs; ++o) {
    auto id = fmt::format("org{}", o);
    w.type(id, "Organization");
    w.text(id, "name", fmt::format("Org {}", o));
    w.iri(id, "locatedIn", fmt::format("city{}", uniform(0, cities - 1)));
    w.number(id, "founded", uniform(1900, 2020));
    if (chance(0.6)) w.number(id, "revenue", uniform(1'000'000, 10'000'000'000));
  }
  for (std::uint64_t p = 0; w.count() < target_triples; ++p) {
    auto id = fmt::format("person{}", p);
    w.type(id, "Person");
    w.text(id, "name", fmt::format("Person {}", p));
    w.number(id, "age", uniform(18, 80));
    if (chance(0.9)) w.iri(id, "worksFor", fmt::format("org{}", uniform(0, orgs - 1)));
    if (chance(0.8)) w.iri(id, "livesIn", fmt::format("city{}", uniform(0, cities - 1)));
    if (chance(0.5)) w.text(id, "email", fmt::format("person{}@example.org", p));
    if (p > 0) {
      std::set<std::uint64_t> friends;
      auto k = uniform(0, 5);
      for (std::uint64_t i = 0; i < k; ++i) friends.insert(uniform(0, p - 1));
      for (auto f : friends) w.iri(id, "knows", fmt::format("person{}", f));
    }
  }
  return w.count();
}

std::vector<sparql::LogEntry> GeneratedSet::log() const {
  std::vector<sparql::LogEntry> out;
  for (const auto& q : queries) out.push_back({q.query, 1});
  return out;
}

namespace {

class Generator {
 public:
  Generator(const rdf::TripleStore& store, const rdf::Dictionary& dict, const GenConfig& cfg)
      : store_(store), dict_(dict), cfg_(cfg), rng_(cfg.seed) {
    std::set<rdf::TermId> props;
    for (const auto& t : store.index_content(rdf::IndexOrder::PSO)) props.insert(t.p);
    properties_.assign(props.begin(), props.end());
    type_ = dict.lookup(rdf::Term::iri(std::string(kRdfType)));
  }

  GeneratedSet run() {
    GeneratedSet out;
    if (properties_.empty()) throw Error("cannot generate queries from an empty store");
    std::uint64_t attempts = 0;
    const std::uint64_t max_attempts = static_cast<std::uint64_t>(cfg_.count) * 50 + 50;
    while (out.queries.size() < cfg_.count && attempts++ < max_attempts) {
      bool star = pick(2) == 0;
      auto q = star ? star_query() : path_query();
      if (!q) {
        out.notices.push_back(notice_);
        continue;
      }
      out.queries.push_back(std::move(*q));
    }
    if (out.queries.size() < cfg_.count) {
      out.notices.push_back(fmt::format("generated {} of {} queries", out.queries.size(), cfg_.count));
    }
    return out;
  }

 private:
  std::uint64_t pick(std::uint64_t n) { return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(rng_); }

  std::vector<rdf::Triple> scan(std::optional<rdf::TermId> s, std::optional<rdf::TermId> p) const {
    rdf::IdPattern pattern;
    pattern.s = s;
    pattern.p = p;
    return store_.scan(pattern, s ? rdf::IndexOrder::SPO : rdf::IndexOrder::PSO);
  }

  bool bindable(rdf::TermId id) const {
    const auto& t = dict_.term(id);
    return t.is_literal() || !t.lexical.starts_with("_:");
  }
  bool is_node(rdf::TermId id) const { return !dict_.term(id).is_literal(); }
  std::string constant(rdf::TermId id) const { return rdf::to_ntriples(dict_.term(id)); }

  GeneratedQuery finish(Shape shape, const std::vector<std::string>& patterns) const {
    std::string text = "SELECT * WHERE {\n";
    for (const auto& p : patterns) text += "  " + p + " .\n";
    text += "}\n";
    return {shape, text, sparql::parse_sparql(text)};
  }

  std::optional<GeneratedQuery> star_query() {
    auto seed = properties_[pick(properties_.size())];
    auto size = static_cast<std::size_t>(pick(cfg_.max_star) + 1);
    auto with_seed = scan(std::nullopt, seed);
    for (int tries = 0; tries < 16; ++tries) {
      const auto& witness = with_seed[pick(with_seed.size())];
      if (!bindable(witness.s) && size == 1) continue;
      std::map<rdf::TermId, rdf::TermId> first_object;
      for (const auto& t : scan(witness.s, std::nullopt)) first_object.emplace(t.p, t.o);
      if (first_object.size() < size) continue;
      std::vector<rdf::TermId> chosen{seed};
      std::vector<rdf::TermId> others;
      for (const auto& [p, o] : first_object) {
        if (p != seed) others.push_back(p);
      }
      std::shuffle(others.begin(), others.end(), rng_);
      chosen.insert(chosen.end(), others.begin(), others.begin() + static_cast<std::ptrdiff_t>(size - 1));
      first_object[seed] = witness.o;
      auto bound = pick(2) == 0 ? pick(size) : size;
      std::vector<std::string> patterns;
      for (std::size_t i = 0; i < size; ++i) {
        auto p = chosen[i];
        auto o = first_object[p];
        bool bind = (i == bound || p == type_) && bindable(o);
        patterns.push_back(fmt::format("?s {} {}", constant(p), bind ? constant(o) : fmt::format("?o{}", i)));
      }
      return finish(Shape::Star, patterns);
    }
    notice_ = fmt::format("skipped star of {} patterns seeded by {}: no subject has enough properties", size,
                          constant(seed));
    return std::nullopt;
  }

  std::optional<GeneratedQuery> path_query() {
    auto seed = properties_[pick(properties_.size())];
    auto length = static_cast<std::size_t>(pick(cfg_.max_path) + 1);
    auto with_seed = scan(std::nullopt, seed);
    for (int tries = 0; tries < 16; ++tries) {
      std::vector<rdf::Triple> walk{with_seed[pick(with_seed.size())]};
      while (walk.size() < length && is_node(walk.back().o)) {
        auto next = scan(walk.back().o, std::nullopt);
        if (next.empty()) break;
        walk.push_back(next[pick(next.size())]);
      }
      if (walk.size() < length) continue;
      // Long chains stay selective by fixing one end.
      auto end = length == 1 ? pick(3) : pick(2);
      std::vector<std::string> patterns;
      for (std::size_t i = 0; i < length; ++i) {
        auto subject = i == 0 && end == 0 && bindable(walk[0].s) ? constant(walk[0].s) : fmt::format("?v{}", i);
        auto object = i + 1 == length && end == 1 && bindable(walk[i].o) ? constant(walk[i].o)
                                                                       : fmt::format("?v{}", i + 1);
        if (walk[i].p == type_ && bindable(walk[i].o)) object = constant(walk[i].o);
        patterns.push_back(fmt::format("{} {} {}", subject, constant(walk[i].p), object));
      }
      return finish(Shape::Path, patterns);
    }
    notice_ = fmt::format("skipped path of {} patterns seeded by {}: no walk of that length", length, constant(seed));
    return std::nullopt;
  }

  const rdf::TripleStore& store_;
  const rdf::Dictionary& dict_;
  GenConfig cfg_;
  std::mt19937_64 rng_;
  std::vector<rdf::TermId> properties_;
  rdf::TermId type_ = rdf::kUnassigned;
  std::string notice_;
};

}  // namespace

GeneratedSet generate_queries(const rdf::TripleStore& store, const rdf::Dictionary& dict, const GenConfig& cfg) {
  if (cfg.max_star == 0 || cfg.max_path == 0) throw Error("pattern maxima must be at least 1");
  return Generator(store, dict, cfg).run();
}

}  // namespace partout::bench
