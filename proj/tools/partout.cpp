#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

#include "partout/alloc/allocation.hpp"
#include "partout/alloc/catalog.hpp"
#include "partout/alloc/host_sweep.hpp"
#include "partout/bench/driver.hpp"
#include "partout/bench/example.hpp"
#include "partout/bench/generator.hpp"
#include "partout/error.hpp"
#include "partout/fragment/fragmentation.hpp"
#include "partout/plan/plan.hpp"
#include "partout/rdf/ntriples.hpp"
#include "partout/runtime/coordinator.hpp"
#include "partout/runtime/worker.hpp"
#include "partout/sparql/query.hpp"
#include "partout/workload/analyzer.hpp"

namespace fs = std::filesystem;
using namespace partout;
using nlohmann::json;

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  return out;
}

/// Writes to `path`, or stdout when it is empty or "-".
template <typename F>
void with_output(const std::string& path, F&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    std::cout.flush();
  } else {
    auto out = open_out(path);
    write(out);
  }
}

std::string read_file(const std::string& path) {
  auto in = open_in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

rdf::TripleStore load_data(const std::string& path, rdf::Dictionary& dict) {
  auto in = open_in(path);
  rdf::TripleStore store;
  for (const auto& t : rdf::parse_ntriples(in, dict)) store.insert(t);
  return store;
}

workload::QueryLog load_log(const std::string& path) {
  auto in = open_in(path);
  return sparql::parse_query_log(in);
}

struct LoadedCatalog {
  alloc::Catalog catalog;
  rdf::Dictionary dict;
};

LoadedCatalog load_catalog_with_dictionary(const std::string& path) {
  LoadedCatalog out{alloc::load_catalog(path), {}};
  if (out.catalog.dictionary_path.empty()) throw FormatError("catalog has no dictionary_path");
  fs::path dict_path = out.catalog.dictionary_path;
  if (dict_path.is_relative()) dict_path = fs::path(path).parent_path() / dict_path;
  auto in = open_in(dict_path.string());
  out.dict = rdf::Dictionary::read(in);
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream s(text);
  for (std::string item; std::getline(s, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string query_text(const std::string& inline_text, const std::string& file) {
  if (!inline_text.empty() && !file.empty()) throw UsageError("give either --sparql or --file, not both");
  if (!inline_text.empty()) return inline_text;
  if (!file.empty()) return read_file(file);
  throw UsageError("a query is required: --sparql or --file");
}

json result_json(const runtime::Coordinator& c, const runtime::QueryResult& r) {
  json rows = json::array();
  for (const auto& row : c.decode(r)) {
    json cells = json::array();
    for (const auto& t : row) cells.push_back(t ? json(rdf::to_ntriples(*t)) : json(nullptr));
    rows.push_back(cells);
  }
  return {{"columns", r.columns}, {"rows", rows}, {"remote_pages", r.remote_pages}, {"result_pages", r.result_pages}};
}

void print_result(const json& r) {
  std::string header;
  for (const auto& c : r.at("columns")) header += (header.empty() ? "?" : "\t?") + c.get<std::string>();
  std::cout << header << "\n";
  for (const auto& row : r.at("rows")) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) line += "\t";
      if (!row[i].is_null()) line += row[i].get<std::string>();
    }
    std::cout << line << "\n";
  }
  std::cerr << fmt::format("{} rows, {} remote pages\n", r.at("rows").size(), r.at("remote_pages").get<std::uint64_t>());
}

/// A bootstrapped cluster inside this process.
struct InProcess {
  rdf::Dictionary dict;
  std::unique_ptr<runtime::LocalCluster> workers;
  std::unique_ptr<runtime::Coordinator> coordinator;

  InProcess(const std::string& catalog_path, const std::string& data_path) {
    auto loaded = load_catalog_with_dictionary(catalog_path);
    dict = std::move(loaded.dict);
    auto store = load_data(data_path, dict);
    workers = std::make_unique<runtime::LocalCluster>(loaded.catalog.host_count);
    workers->attach(loaded.catalog);
    coordinator = std::make_unique<runtime::Coordinator>(std::move(loaded.catalog), dict);
    coordinator->bootstrap(store);
  }
};

class HttpCoordinator {
 public:
  explicit HttpCoordinator(const std::string& address) : client_(with_scheme(address)) {
    client_.set_read_timeout(600, 0);
  }

  json post(const std::string& path, const std::string& body) {
    auto res = client_.Post(path, body, "text/plain");
    if (!res) throw ClusterError("coordinator unreachable: " + httplib::to_string(res.error()));
    auto reply = json::parse(res->body, nullptr, false);
    if (res->status != 200) {
      auto message = reply.is_object() ? reply.value("error", res->body) : res->body;
      throw ClusterError(fmt::format("coordinator answered {}: {}", res->status, message));
    }
    return reply;
  }

 private:
  static std::string with_scheme(const std::string& a) { return a.starts_with("http") ? a : "http://" + a; }
  httplib::Client client_;
};

void wait_for_signal() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  int sig = 0;
  sigwait(&set, &sig);
}

void block_signals() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
}

json apply_updates(runtime::Coordinator& c, const std::vector<runtime::Update>& updates) {
  std::uint64_t changed = 0;
  std::set<std::uint32_t> hosts;
  for (const auto& r : c.apply_all(updates)) {
    changed += r.changed;
    hosts.insert(r.hosts.begin(), r.hosts.end());
  }
  return {{"applied", updates.size()}, {"changed", changed}, {"hosts", hosts}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Workload-aware partitioning and distributed query processing for RDF"};
  app.require_subcommand(1);

  // gen-example
  std::string example_out, example_log;
  auto* gen_example = app.add_subcommand("gen-example", "Write the cities/companies example dataset");
  gen_example->add_option("--out", example_out, "N-Triples output (default stdout)");
  gen_example->add_option("--query-log", example_log, "Also write the example query log here");

  // gen-data
  std::string data_out;
  std::uint64_t data_triples = 100000, data_seed = 1;
  auto* gen_data = app.add_subcommand("gen-data", "Write a synthetic people/organizations dataset");
  gen_data->add_option("--out", data_out, "N-Triples output (default stdout)");
  gen_data->add_option("--triples", data_triples, "Minimum number of triples")->capture_default_str();
  gen_data->add_option("--seed", data_seed)->capture_default_str();

  // partition
  std::string part_data, part_log, part_out;
  fragment::PartitionOptions part_opt;
  bool part_by_property = false;
  auto* partition = app.add_subcommand("partition", "Fragment a dataset for a query log");
  partition->add_option("--data", part_data, "N-Triples dataset")->required();
  partition->add_option("--log", part_log, "Query log")->required();
  partition->add_option("--theta", part_opt.theta, "Constant frequency threshold")->capture_default_str();
  partition->add_option("--sample", part_opt.sample_fraction, "Sample fraction")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  partition->add_option("--seed", part_opt.seed)->capture_default_str();
  partition->add_flag("--by-property", part_by_property, "One fragment per queried property");
  partition->add_option("--out", part_out, "Fragmentation file")->required();

  // allocate
  std::string alloc_frag, alloc_data, alloc_out, alloc_workers;
  std::uint32_t alloc_hosts = 0;
  std::vector<std::uint64_t> alloc_capacity;
  alloc::AllocationOptions alloc_opt;
  bool alloc_no_affinity = false;
  plan::CostModel cost_model;
  auto add_cost_flags = [&](CLI::App* cmd) {
    cmd->add_option("--t-page", cost_model.t_page, "Cost of one transferred page")->capture_default_str();
    cmd->add_option("--host-scan-cost", cost_model.c_host_scan, "Scan cost per triple stored on the host")
        ->capture_default_str();
  };
  auto* allocate = app.add_subcommand("allocate", "Allocate fragments to hosts and write a catalog");
  allocate->add_option("--fragmentation", alloc_frag, "Fragmentation file")->required();
  allocate->add_option("--data", alloc_data, "N-Triples dataset")->required();
  allocate->add_option("--hosts", alloc_hosts, "Number of hosts")->required()->check(CLI::PositiveNumber);
  allocate->add_option("--capacity", alloc_capacity, "Bytes per host: one value, or one per host");
  allocate->add_option("--triple-bytes", alloc_opt.triple_bytes)->capture_default_str();
  allocate->add_flag("--no-affinity", alloc_no_affinity, "Ignore the fragment graph when allocating");
  allocate->add_option("--workers", alloc_workers, "Comma-separated worker addresses, by host id");
  allocate->add_option("--out", alloc_out, "Catalog file; the dictionary is written next to it")->required();
  add_cost_flags(allocate);

  // optimize-hosts
  std::string opt_frag, opt_data, opt_log, opt_csv;
  std::uint32_t opt_min = 1, opt_max = 8;
  std::uint64_t opt_capacity = 0;
  auto* optimize = app.add_subcommand("optimize-hosts", "Sweep host counts and report the cheapest");
  optimize->add_option("--fragmentation", opt_frag, "Fragmentation file")->required();
  optimize->add_option("--data", opt_data, "N-Triples dataset")->required();
  optimize->add_option("--log", opt_log, "Query log to estimate")->required();
  optimize->add_option("--min", opt_min)->capture_default_str()->check(CLI::PositiveNumber);
  optimize->add_option("--max", opt_max)->capture_default_str()->check(CLI::PositiveNumber);
  optimize->add_option("--capacity", opt_capacity, "Bytes per host; 0 is unbounded")->capture_default_str();
  optimize->add_option("--csv", opt_csv, "Sweep output: hosts,cost");
  add_cost_flags(optimize);

  // serve-worker
  std::string worker_listen = "127.0.0.1:7000";
  std::int32_t worker_host = -1;
  auto* serve_worker = app.add_subcommand("serve-worker", "Run a storage and execution node");
  serve_worker->add_option("--listen", worker_listen)->capture_default_str();
  serve_worker->add_option("--host-id", worker_host, "Host id; the coordinator also assigns it");

  // serve-coordinator
  std::string coord_catalog, coord_data, coord_workers, coord_listen = "127.0.0.1:8080";
  auto* serve_coordinator = app.add_subcommand("serve-coordinator", "Bootstrap workers and serve queries over HTTP");
  serve_coordinator->add_option("--catalog", coord_catalog)->required();
  serve_coordinator->add_option("--data", coord_data, "N-Triples dataset to load")->required();
  serve_coordinator->add_option("--workers", coord_workers, "Comma-separated worker addresses, by host id");
  serve_coordinator->add_option("--listen", coord_listen, "HTTP address")->capture_default_str();

  // query / explain / update / bench share the cluster selection flags
  std::string run_catalog, run_data, run_coordinator, run_sparql, run_file;
  bool run_in_process = false;
  bool explain_json = false;
  auto add_target = [&](CLI::App* cmd) {
    cmd->add_flag("--in-process", run_in_process, "Run a local cluster inside this process");
    cmd->add_option("--catalog", run_catalog, "Catalog (with --in-process)");
    cmd->add_option("--data", run_data, "N-Triples dataset (with --in-process)");
    cmd->add_option("--coordinator", run_coordinator, "HTTP address of serve-coordinator");
  };
  auto* query = app.add_subcommand("query", "Run a SPARQL query");
  add_target(query);
  query->add_option("--sparql", run_sparql, "Query text");
  query->add_option("--file", run_file, "Query file");

  auto* explain = app.add_subcommand("explain", "Print the distributed plan of a query");
  explain->add_option("--catalog", run_catalog)->required();
  explain->add_option("--sparql", run_sparql, "Query text");
  explain->add_option("--file", run_file, "Query file");
  explain->add_flag("--json", explain_json, "Print the plan as JSON");

  std::string update_file, update_export;
  auto* update = app.add_subcommand("update", "Apply `+`/`-` N-Triples lines");
  add_target(update);
  update->add_option("--updates", update_file, "Update file")->required();
  update->add_option("--export", update_export, "With --in-process: write the union of worker stores here");

  // gen-queries
  std::string gq_data, gq_out;
  bench::GenConfig gen_cfg;
  auto* gen_queries = app.add_subcommand("gen-queries", "Generate random star and path queries");
  gen_queries->add_option("--data", gq_data, "N-Triples dataset")->required();
  gen_queries->add_option("--count", gen_cfg.count)->capture_default_str();
  gen_queries->add_option("--max-star", gen_cfg.max_star)->capture_default_str()->check(CLI::PositiveNumber);
  gen_queries->add_option("--max-path", gen_cfg.max_path)->capture_default_str()->check(CLI::PositiveNumber);
  gen_queries->add_option("--seed", gen_cfg.seed)->capture_default_str();
  gen_queries->add_option("--out", gq_out, "Query log output (default stdout)");

  // bench
  std::string bench_queries, bench_out;
  bench::BenchConfig bench_cfg;
  std::int64_t bench_interval = 1000, bench_timeout = 60000;
  auto* bench_cmd = app.add_subcommand("bench", "Issue queries repeatedly and record response times");
  add_target(bench_cmd);
  bench_cmd->add_option("--queries", bench_queries, "Query log")->required();
  bench_cmd->add_option("--concurrency", bench_cfg.concurrency)->capture_default_str()->check(CLI::PositiveNumber);
  bench_cmd->add_option("--interval-ms", bench_interval)->capture_default_str()->check(CLI::PositiveNumber);
  bench_cmd->add_option("--repetitions", bench_cfg.repetitions)->capture_default_str();
  bench_cmd->add_option("--timeout-ms", bench_timeout)->capture_default_str()->check(CLI::PositiveNumber);
  bench_cmd->add_option("--out", bench_out, "CSV output (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  auto make_target = [&]() -> std::function<json(const std::string&, const std::string&)> {
    if (run_in_process == !run_coordinator.empty()) {
      throw UsageError("choose exactly one of --in-process and --coordinator");
    }
    if (run_in_process) {
      if (run_catalog.empty() || run_data.empty()) throw UsageError("--in-process needs --catalog and --data");
      auto cluster = std::make_shared<InProcess>(run_catalog, run_data);
      return [cluster](const std::string& path, const std::string& body) -> json {
        auto& c = *cluster->coordinator;
        if (path == "/query") return result_json(c, c.query(sparql::parse_sparql(body)));
        std::istringstream in(body);
        return apply_updates(c, runtime::parse_updates(in));
      };
    }
    auto http = std::make_shared<HttpCoordinator>(run_coordinator);
    return [http](const std::string& path, const std::string& body) { return http->post(path, body); };
  };

  try {
    if (*gen_example) {
      with_output(example_out, [](std::ostream& out) { bench::write_example_dataset(out); });
      if (!example_log.empty()) {
        auto out = open_out(example_log);
        out << bench::example_query_log();
      }
    } else if (*gen_data) {
      std::uint64_t n = 0;
      with_output(data_out, [&](std::ostream& out) { n = bench::write_synthetic_dataset(out, data_triples, data_seed); });
      std::cerr << fmt::format("{} triples\n", n);
    } else if (*partition) {
      rdf::Dictionary dict;
      auto store = load_data(part_data, dict);
      auto log = load_log(part_log);
      auto frag = part_by_property ? fragment::by_property_fragmentation(store, dict, log, part_opt)
                                   : fragment::partition(store, dict, log, part_opt);
      alloc::FragmentationFile file;
      file.fragmentation = frag;
      file.theta = part_opt.theta;
      file.graph = part_by_property
                       ? alloc::FragmentGraph{}
                       : alloc::build_fragment_graph(workload::build_global_query_graph(log, part_opt.theta), frag);
      alloc::save_fragmentation(file, part_out);
      std::cout << "id\tsize\tfreq\tminterm\n";
      for (const auto& f : frag.fragments()) {
        std::cout << fmt::format("{}\t{}\t{}\t{}\n", f.id, f.size, f.freq,
                                 f.remainder ? std::string("remainder") : frag.minterm_text(f));
      }
    } else if (*allocate) {
      auto file = alloc::load_fragmentation(alloc_frag);
      rdf::Dictionary dict;
      auto store = load_data(alloc_data, dict);
      std::vector<std::uint64_t> caps;
      if (alloc_capacity.empty()) {
        caps.assign(alloc_hosts, std::numeric_limits<std::uint64_t>::max() / 2);
      } else if (alloc_capacity.size() == 1) {
        caps.assign(alloc_hosts, alloc_capacity[0]);
      } else if (alloc_capacity.size() == alloc_hosts) {
        caps = alloc_capacity;
      } else {
        throw UsageError("--capacity takes one value or one per host");
      }
      alloc_opt.affinity = !alloc_no_affinity;
      auto allocation = alloc::allocate(alloc::fragment_loads(file.fragmentation), file.graph, caps, alloc_opt);
      auto addresses = split_list(alloc_workers);
      if (!addresses.empty() && addresses.size() != alloc_hosts) throw UsageError("--workers needs one address per host");
      std::vector<alloc::HostEndpoint> hosts;
      for (std::uint32_t h = 0; h < alloc_hosts; ++h) {
        hosts.push_back({h, addresses.empty() ? "" : addresses[h], alloc_capacity.empty() ? 0 : caps[h]});
      }
      auto catalog = alloc::make_catalog(file.fragmentation, file.graph, allocation, hosts, cost_model);
      catalog.triple_bytes = alloc_opt.triple_bytes;
      alloc::compute_stats(catalog, store, dict);
      fs::path dict_path = fs::path(alloc_out).string() + ".dict";
      catalog.dictionary_path = dict_path.filename().string();
      {
        auto out = open_out(dict_path.string());
        dict.write(out);
      }
      alloc::save_catalog(catalog, alloc_out);
      for (std::uint32_t h = 0; h < alloc_hosts; ++h) {
        std::string frags;
        for (auto f : allocation.hosts[h].fragments) frags += (frags.empty() ? "" : ",") + std::to_string(f);
        std::cout << fmt::format("host{}\t{{{}}}\tload={}\n", h, frags, allocation.hosts[h].current_load);
      }
    } else if (*optimize) {
      if (opt_min > opt_max) throw UsageError("--min exceeds --max");
      auto file = alloc::load_fragmentation(opt_frag);
      rdf::Dictionary dict;
      auto store = load_data(opt_data, dict);
      auto log = load_log(opt_log);
      alloc::Allocation one;
      one.host_count = 1;
      auto base = alloc::make_catalog(file.fragmentation, file.graph, one, {}, cost_model);
      alloc::compute_stats(base, store, dict);
      auto sweep = alloc::optimal_host_count(base, dict, log, opt_min, opt_max, opt_capacity);
      if (!opt_csv.empty()) {
        auto out = open_out(opt_csv);
        out << "hosts,cost\n";
        for (const auto& p : sweep.points) out << fmt::format("{},{:.6f}\n", p.hosts, p.cost);
      }
      for (const auto& p : sweep.points) std::cerr << fmt::format("n={}\tcost={:.3f}\n", p.hosts, p.cost);
      std::cout << sweep.best << "\n";
    } else if (*serve_worker) {
      block_signals();
      runtime::Worker worker(worker_listen, worker_host);
      worker.start();
      std::cerr << "worker listening on " << worker.address() << "\n";
      wait_for_signal();
      worker.stop();
    } else if (*serve_coordinator) {
      block_signals();
      auto loaded = load_catalog_with_dictionary(coord_catalog);
      auto store = load_data(coord_data, loaded.dict);
      auto addresses = split_list(coord_workers);
      if (!addresses.empty()) {
        if (addresses.size() != loaded.catalog.host_count) throw UsageError("--workers needs one address per host");
        for (std::uint32_t h = 0; h < addresses.size(); ++h) loaded.catalog.hosts[h].address = addresses[h];
      }
      runtime::Coordinator coordinator(std::move(loaded.catalog), loaded.dict);
      coordinator.bootstrap(store);
      httplib::Server server;
      auto guarded = [](auto&& body) {
        return [body](const httplib::Request& req, httplib::Response& res) {
          try {
            res.set_content(body(req.body), "application/json");
          } catch (const ParseError& e) {
            res.status = 400;
            res.set_content(json{{"error", e.what()}}.dump(), "application/json");
          } catch (const UnsupportedError& e) {
            res.status = 400;
            res.set_content(json{{"error", e.what()}}.dump(), "application/json");
          } catch (const std::exception& e) {
            res.status = 500;
            res.set_content(json{{"error", e.what()}}.dump(), "application/json");
          }
        };
      };
      server.Post("/query", guarded([&](const std::string& body) {
                    return result_json(coordinator, coordinator.query(sparql::parse_sparql(body))).dump();
                  }));
      server.Post("/explain", guarded([&](const std::string& body) {
                    auto p = coordinator.plan(sparql::parse_sparql(body));
                    return json{{"plan", plan::to_json(p)}, {"text", plan::explain(p)}}.dump();
                  }));
      server.Post("/update", guarded([&](const std::string& body) {
                    std::istringstream in(body);
                    return apply_updates(coordinator, runtime::parse_updates(in)).dump();
                  }));
      auto colon = coord_listen.rfind(':');
      if (colon == std::string::npos) throw UsageError("--listen must be host:port");
      auto host = coord_listen.substr(0, colon);
      int port = std::stoi(coord_listen.substr(colon + 1));
      if (port == 0) port = server.bind_to_any_port(host);
      else if (!server.bind_to_port(host, port)) throw ClusterError("cannot bind " + coord_listen);
      std::cerr << fmt::format("coordinator serving http://{}:{}\n", host, port);
      std::thread http([&] { server.listen_after_bind(); });
      wait_for_signal();
      server.stop();
      http.join();
    } else if (*query) {
      auto text = query_text(run_sparql, run_file);
      auto target = make_target();
      print_result(target("/query", text));
    } else if (*explain) {
      auto text = query_text(run_sparql, run_file);
      auto loaded = load_catalog_with_dictionary(run_catalog);
      plan::Planner planner(loaded.catalog, loaded.dict);
      auto p = planner.plan(sparql::parse_sparql(text));
      if (explain_json) std::cout << plan::to_json(p).dump(2) << "\n";
      else std::cout << plan::explain(p);
    } else if (*update) {
      auto body = read_file(update_file);
      if (!update_export.empty()) {
        if (!run_in_process) throw UsageError("--export needs --in-process");
        if (run_catalog.empty() || run_data.empty()) throw UsageError("--in-process needs --catalog and --data");
        InProcess cluster(run_catalog, run_data);
        std::istringstream in(body);
        std::cout << apply_updates(*cluster.coordinator, runtime::parse_updates(in)).dump() << "\n";
        auto out = open_out(update_export);
        for (const auto& host : cluster.coordinator->export_stores()) {
          for (const auto& t : host) out << rdf::format_ntriples(t, cluster.coordinator->dictionary()) << "\n";
        }
      } else {
        auto target = make_target();
        std::cout << target("/update", body).dump() << "\n";
      }
    } else if (*gen_queries) {
      rdf::Dictionary dict;
      auto store = load_data(gq_data, dict);
      auto set = bench::generate_queries(store, dict, gen_cfg);
      for (const auto& n : set.notices) std::cerr << n << "\n";
      with_output(gq_out, [&](std::ostream& out) { sparql::write_query_log(out, set.log()); });
    } else if (*bench_cmd) {
      auto log = load_log(bench_queries);
      std::vector<sparql::Query> queries;
      for (const auto& e : log) queries.push_back(e.query);
      bench_cfg.interval = std::chrono::milliseconds(bench_interval);
      bench_cfg.timeout = std::chrono::milliseconds(bench_timeout);
      auto target = make_target();
      auto rows = bench::run_bench(queries, bench_cfg, [&](const sparql::Query& q) {
        auto r = target("/query", sparql::render(q));
        return bench::Measurement{r.at("rows").size(), r.at("remote_pages").get<std::uint64_t>()};
      });
      with_output(bench_out, [&](std::ostream& out) { bench::write_bench_csv(out, rows); });
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
