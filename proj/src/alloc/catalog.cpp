#include "partout/alloc/catalog.hpp"

#include <algorithm>
#include <fstream>

#include <fmt/format.h>

#include "partout/error.hpp"

namespace partout::alloc {

using nlohmann::json;

namespace {

void decrement(std::map<rdf::TermId, std::uint64_t>& m, rdf::TermId key) {
  auto it = m.find(key);
  if (it == m.end()) return;
  if (--it->second == 0) m.erase(it);
}

std::string component_name(rdf::Component c) {
  switch (c) {
    case rdf::Component::Subject: return "subj";
    case rdf::Component::Property: return "prop";
    case rdf::Component::Object: return "obj";
  }
  return "?";
}

rdf::Component component_from(const std::string& s) {
  if (s == "subj") return rdf::Component::Subject;
  if (s == "prop") return rdf::Component::Property;
  if (s == "obj") return rdf::Component::Object;
  throw FormatError("unknown component '" + s + "'");
}

rdf::CompareOp op_from(const std::string& s) {
  for (int i = 0; i < 5; ++i) {
    auto op = static_cast<rdf::CompareOp>(i);
    if (rdf::op_symbol(op) == s) return op;
  }
  throw FormatError("unknown comparison '" + s + "'");
}

json predicate_json(const fragment::SimplePredicate& p) {
  json j{{"component", component_name(p.component)}};
  if (p.is_func) {
    j["func"] = p.func == fragment::FuncKind::IsIri ? "isIRI" : "isLiteral";
  } else {
    j["op"] = std::string(rdf::op_symbol(p.op));
    j["constant"] = rdf::to_ntriples(p.constant);
  }
  return j;
}

fragment::SimplePredicate predicate_from(const json& j) {
  auto c = component_from(j.at("component").get<std::string>());
  if (j.contains("func")) {
    auto f = j.at("func").get<std::string>();
    if (f != "isIRI" && f != "isLiteral") throw FormatError("unknown function '" + f + "'");
    return fragment::SimplePredicate::function(
        c, f == "isIRI" ? fragment::FuncKind::IsIri : fragment::FuncKind::IsLiteral);
  }
  return fragment::SimplePredicate::compare(c, op_from(j.at("op").get<std::string>()),
                                            rdf::from_ntriples(j.at("constant").get<std::string>()));
}

json stats_json(const FragmentStats& s) {
  json props = json::array();
  for (const auto& [p, n] : s.property_counts) {
    props.push_back({p, n, s.property_subjects.count(p) ? s.property_subjects.at(p) : 0,
                     s.property_objects.count(p) ? s.property_objects.at(p) : 0});
  }
  json po = json::array();
  for (const auto& [k, n] : s.po_counts) po.push_back({k.first, k.second, n});
  return {{"triples", s.triples},
          {"distinct_s", s.distinct_s},
          {"distinct_p", s.distinct_p},
          {"distinct_o", s.distinct_o},
          {"properties", props},
          {"property_objects", po},
          {"po_truncated", s.po_truncated}};
}

FragmentStats stats_from(const json& j) {
  FragmentStats s;
  s.triples = j.at("triples").get<std::uint64_t>();
  s.distinct_s = j.at("distinct_s").get<std::uint64_t>();
  s.distinct_p = j.at("distinct_p").get<std::uint64_t>();
  s.distinct_o = j.at("distinct_o").get<std::uint64_t>();
  for (const auto& row : j.at("properties")) {
    auto p = row.at(0).get<rdf::TermId>();
    s.property_counts[p] = row.at(1).get<std::uint64_t>();
    if (auto v = row.at(2).get<std::uint64_t>()) s.property_subjects[p] = v;
    if (auto v = row.at(3).get<std::uint64_t>()) s.property_objects[p] = v;
  }
  for (const auto& row : j.at("property_objects")) {
    s.po_counts[{row.at(0).get<rdf::TermId>(), row.at(1).get<rdf::TermId>()}] =
        row.at(2).get<std::uint64_t>();
  }
  s.po_truncated = j.at("po_truncated").get<bool>();
  return s;
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(fmt::format("corrupt file {}: {}", path.string(), e.what()));
  }
}

void write_json(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(1) << '\n';
}

void check_version(const json& j) {
  if (!j.is_object() || !j.contains("version")) throw FormatError("missing version tag");
  if (j.at("version") != Catalog::kVersion) {
    throw FormatError(fmt::format("unsupported version {}", j.at("version").dump()));
  }
}

}  // namespace

void FragmentStats::record_insert(const rdf::Triple& t) {
  ++triples;
  ++property_counts[t.p];
  auto it = po_counts.find({t.p, t.o});
  if (it != po_counts.end()) {
    ++it->second;
  } else if (!po_truncated) {
    po_counts[{t.p, t.o}] = 1;
  }
}

void FragmentStats::record_erase(const rdf::Triple& t) {
  if (triples > 0) --triples;
  decrement(property_counts, t.p);
  auto it = po_counts.find({t.p, t.o});
  if (it != po_counts.end() && --it->second == 0) po_counts.erase(it);
}

void StatsBuilder::add(std::uint32_t fragment, const rdf::Triple& t) {
  auto& a = acc_[fragment];
  ++a.triples;
  a.s.insert(t.s);
  a.p.insert(t.p);
  a.o.insert(t.o);
  ++a.props[t.p];
  a.prop_s[t.p].insert(t.s);
  a.prop_o[t.p].insert(t.o);
  ++a.po[{t.p, t.o}];
}

std::map<std::uint32_t, FragmentStats> StatsBuilder::finish() const {
  std::map<std::uint32_t, FragmentStats> out;
  for (const auto& [id, a] : acc_) {
    FragmentStats s;
    s.triples = a.triples;
    s.distinct_s = a.s.size();
    s.distinct_p = a.p.size();
    s.distinct_o = a.o.size();
    for (const auto& [p, n] : a.props) s.property_counts[p] = n;
    for (const auto& [p, set] : a.prop_s) s.property_subjects[p] = set.size();
    for (const auto& [p, set] : a.prop_o) s.property_objects[p] = set.size();
    std::vector<std::pair<std::pair<rdf::TermId, rdf::TermId>, std::uint64_t>> po(a.po.begin(), a.po.end());
    std::sort(po.begin(), po.end(), [](const auto& x, const auto& y) {
      return x.second != y.second ? x.second > y.second : x.first < y.first;
    });
    if (po.size() > kTopPropertyObjects) {
      po.resize(kTopPropertyObjects);
      s.po_truncated = true;
    }
    s.po_counts.insert(po.begin(), po.end());
    out[id] = std::move(s);
  }
  return out;
}

std::vector<std::uint32_t> Catalog::hosts_of(std::uint32_t fragment) const {
  if (fragment == fragmentation.remainder_id()) {
    std::vector<std::uint32_t> all(host_count);
    for (std::uint32_t h = 0; h < host_count; ++h) all[h] = h;
    return all;
  }
  auto it = allocation.find(fragment);
  if (it == allocation.end()) throw Error(fmt::format("fragment {} is not allocated", fragment));
  return {it->second};
}

std::vector<fragment::Mask> Catalog::stray_masks() const {
  std::vector<fragment::Mask> out;
  for (const auto& [m, n] : remainder_strays) {
    if (n > 0) out.push_back(m);
  }
  return out;
}

const FragmentStats& Catalog::stats_of(std::uint32_t fragment) const {
  static const FragmentStats empty;
  auto it = stats.find(fragment);
  return it == stats.end() ? empty : it->second;
}

std::uint32_t Catalog::route(const rdf::Triple& t, const rdf::Dictionary& dict) const {
  auto id = fragmentation.fragment_of(t, dict);
  if (id == fragmentation.remainder_id()) {
    return remainder_host(dict.term(t.s).lexical, host_count);
  }
  return allocation.at(id);
}

Catalog make_catalog(const fragment::Fragmentation& frag, const FragmentGraph& graph,
                     const Allocation& allocation, const std::vector<HostEndpoint>& hosts,
                     const plan::CostModel& cost_model) {
  Catalog c;
  c.cost_model = cost_model;
  c.fragmentation = frag;
  c.graph = graph;
  c.allocation = allocation.fragment_host;
  c.host_count = allocation.host_count;
  c.hosts = hosts;
  for (std::uint32_t h = static_cast<std::uint32_t>(c.hosts.size()); h < c.host_count; ++h) {
    c.hosts.push_back({h, "", 0});
  }
  return c;
}

void compute_stats(Catalog& catalog, const rdf::TripleStore& store, const rdf::Dictionary& dict) {
  StatsBuilder builder;
  catalog.remainder_strays.clear();
  const auto& frag = catalog.fragmentation;
  for (const auto& t : store.triples()) {
    const auto& s = dict.term(t.s);
    const auto& p = dict.term(t.p);
    const auto& o = dict.term(t.o);
    auto id = frag.fragment_of(s, p, o);
    builder.add(id, t);
    if (id == frag.remainder_id()) {
      if (auto mask = frag.mask_of(s, p, o)) ++catalog.remainder_strays[mask];
    }
  }
  catalog.stats = builder.finish();
}

json to_json(const fragment::Fragmentation& frag) {
  json preds = json::array();
  for (const auto& p : frag.predicates()) preds.push_back(predicate_json(p));
  json fragments = json::array();
  for (const auto& f : frag.fragments()) {
    json minterm = json::array();
    for (std::size_t i = 0; i < frag.predicates().size(); ++i) {
      minterm.push_back({{"predicate", i}, {"positive", f.remainder ? false : ((f.minterm >> i) & 1) == 1}});
    }
    fragments.push_back({{"id", f.id},
                         {"mask", f.minterm},
                         {"remainder", f.remainder},
                         {"minterm", minterm},
                         {"size", f.size},
                         {"freq", f.freq}});
  }
  return {{"predicates", preds}, {"fragments", fragments}};
}

fragment::Fragmentation fragmentation_from_json(const json& j) {
  try {
    std::vector<fragment::SimplePredicate> preds;
    for (const auto& p : j.at("predicates")) preds.push_back(predicate_from(p));
    std::vector<fragment::Fragment> fragments;
    if (j.at("fragments").empty()) return {};
    for (const auto& f : j.at("fragments")) {
      fragments.push_back({f.at("id").get<std::uint32_t>(), f.at("mask").get<fragment::Mask>(),
                           f.at("remainder").get<bool>(), f.at("freq").get<std::uint64_t>(),
                           f.at("size").get<std::uint64_t>()});
    }
    return fragment::Fragmentation(std::move(preds), std::move(fragments));
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed fragmentation: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("malformed fragmentation: ") + e.what());
  }
}

json to_json(const FragmentGraph& graph) {
  json edges = json::array();
  for (const auto& [k, w] : graph.edges()) edges.push_back({k.first, k.second, w});
  return edges;
}

FragmentGraph fragment_graph_from_json(const json& j) {
  FragmentGraph g;
  for (const auto& e : j) {
    g.set(e.at(0).get<std::uint32_t>(), e.at(1).get<std::uint32_t>(), e.at(2).get<std::uint64_t>());
  }
  return g;
}

json to_json(const plan::CostModel& m) {
  return {{"t_page", m.t_page},   {"c_scan", m.c_scan},   {"c_cmp", m.c_cmp},
          {"c_out", m.c_out},     {"c_build", m.c_build}, {"c_probe", m.c_probe},
          {"c_host_scan", m.c_host_scan}};
}

plan::CostModel cost_model_from_json(const json& j) {
  plan::CostModel m;
  m.t_page = j.at("t_page").get<double>();
  m.c_scan = j.at("c_scan").get<double>();
  m.c_cmp = j.at("c_cmp").get<double>();
  m.c_out = j.at("c_out").get<double>();
  m.c_build = j.at("c_build").get<double>();
  m.c_probe = j.at("c_probe").get<double>();
  m.c_host_scan = j.value("c_host_scan", 0.0);
  for (double v : {m.t_page, m.c_scan, m.c_cmp, m.c_out, m.c_build, m.c_probe, m.c_host_scan}) {
    if (v < 0) throw FormatError("cost model coefficients must be non-negative");
  }
  return m;
}

json to_json(const Catalog& c) {
  json allocation = json::object();
  for (const auto& [f, h] : c.allocation) allocation[std::to_string(f)] = h;
  json hosts = json::array();
  for (const auto& h : c.hosts) hosts.push_back({{"id", h.id}, {"address", h.address}, {"capacity", h.capacity}});
  json stats = json::object();
  for (const auto& [f, s] : c.stats) stats[std::to_string(f)] = stats_json(s);
  json strays = json::array();
  for (const auto& [m, n] : c.remainder_strays) strays.push_back({m, n});
  auto frag = to_json(c.fragmentation);
  return {{"version", Catalog::kVersion},
          {"cost_model", to_json(c.cost_model)},
          {"dictionary_path", c.dictionary_path},
          {"triple_bytes", c.triple_bytes},
          {"predicates", frag["predicates"]},
          {"fragments", frag["fragments"]},
          {"fragment_graph", to_json(c.graph)},
          {"allocation", allocation},
          {"remainder", {{"hash", "fnv1a-subject"}, {"hosts", c.host_count}}},
          {"hosts", hosts},
          {"stats", stats},
          {"remainder_strays", strays}};
}

Catalog catalog_from_json(const json& j) {
  check_version(j);
  try {
    Catalog c;
    c.cost_model = cost_model_from_json(j.at("cost_model"));
    c.dictionary_path = j.at("dictionary_path").get<std::string>();
    c.triple_bytes = j.at("triple_bytes").get<double>();
    c.fragmentation = fragmentation_from_json(j);
    c.graph = fragment_graph_from_json(j.at("fragment_graph"));
    for (const auto& [k, v] : j.at("allocation").items()) {
      c.allocation[static_cast<std::uint32_t>(std::stoul(k))] = v.get<std::uint32_t>();
    }
    const auto& rem = j.at("remainder");
    if (rem.at("hash") != "fnv1a-subject") throw FormatError("unknown remainder hash " + rem.at("hash").dump());
    c.host_count = rem.at("hosts").get<std::uint32_t>();
    for (const auto& h : j.at("hosts")) {
      c.hosts.push_back({h.at("id").get<std::uint32_t>(), h.at("address").get<std::string>(),
                         h.at("capacity").get<std::uint64_t>()});
    }
    for (const auto& [k, v] : j.at("stats").items()) {
      c.stats[static_cast<std::uint32_t>(std::stoul(k))] = stats_from(v);
    }
    for (const auto& e : j.at("remainder_strays")) {
      c.remainder_strays[e.at(0).get<fragment::Mask>()] = e.at(1).get<std::uint64_t>();
    }
    for (const auto& [f, h] : c.allocation) {
      c.fragmentation.fragment(f);
      if (h >= c.host_count) throw FormatError(fmt::format("fragment {} mapped to unknown host {}", f, h));
    }
    return c;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed catalog: ") + e.what());
  } catch (const std::out_of_range& e) {
    throw FormatError(std::string("inconsistent catalog: ") + e.what());
  }
}

void save_catalog(const Catalog& catalog, const std::filesystem::path& path) {
  write_json(to_json(catalog), path);
}

Catalog load_catalog(const std::filesystem::path& path) {
  return catalog_from_json(read_json(path));
}

void save_fragmentation(const FragmentationFile& file, const std::filesystem::path& path) {
  auto j = to_json(file.fragmentation);
  j["version"] = Catalog::kVersion;
  j["theta"] = file.theta;
  j["fragment_graph"] = to_json(file.graph);
  write_json(j, path);
}

FragmentationFile load_fragmentation(const std::filesystem::path& path) {
  auto j = read_json(path);
  check_version(j);
  try {
    return {fragmentation_from_json(j), fragment_graph_from_json(j.at("fragment_graph")),
            j.at("theta").get<std::uint64_t>()};
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed fragmentation file: ") + e.what());
  }
}

}  // namespace partout::alloc
