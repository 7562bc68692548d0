#pragma once

#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include "partout/alloc/catalog.hpp"
#include "partout/plan/plan.hpp"
#include "partout/rdf/dictionary.hpp"
#include "partout/rdf/ntriples.hpp"
#include "partout/rdf/triple_store.hpp"
#include "partout/runtime/deploy.hpp"
#include "partout/runtime/exchange.hpp"
#include "partout/runtime/worker.hpp"
#include "partout/sparql/query.hpp"

namespace partout::runtime {

/// Request/reply channel to one worker. ERROR replies raise ClusterError.
class ControlSession {
 public:
  ControlSession(const std::string& address, std::uint32_t host);
  Frame request(const Frame& frame);
  void send(const Frame& frame) { socket_.send(frame); }
  Frame receive();
  void shutdown() { socket_.shutdown(); }
  std::uint32_t host() const { return host_; }

 private:
  Socket socket_;
  std::uint32_t host_;
};

struct QueryResult {
  std::vector<std::string> columns;
  std::vector<Row> rows;
  /// Pages sent between workers; results delivered to the coordinator are not counted.
  std::uint64_t remote_pages = 0;
  std::uint64_t result_pages = 0;
  plan::PlanOp plan;
};

enum class UpdateKind : std::uint8_t { Insert, Delete, Modify };

struct Update {
  UpdateKind kind = UpdateKind::Insert;
  rdf::TermTriple triple;
  /// Modify only: the replacement.
  rdf::TermTriple target;

  friend bool operator==(const Update&, const Update&) = default;
};

/// `+ <s> <p> <o> .` inserts, `- ... .` deletes; blank lines and `#` comments are skipped.
std::vector<Update> parse_updates(std::istream& in);

struct UpdateResult {
  /// Hosts whose store changed.
  std::vector<std::uint32_t> hosts;
  std::uint64_t changed = 0;
};

/// Coordinator: owns the catalog and global dictionary, bootstraps workers,
/// plans and deploys queries, routes updates. Worker addresses come from the
/// catalog's host endpoints.
class Coordinator {
 public:
  Coordinator(alloc::Catalog catalog, rdf::Dictionary dict, const std::string& listen = "127.0.0.1:0");
  ~Coordinator();
  Coordinator(const Coordinator&) = delete;
  Coordinator& operator=(const Coordinator&) = delete;

  /// Ships the dictionary and routes every triple to its host; fills the
  /// catalog statistics. `store` is encoded with this coordinator's dictionary.
  void bootstrap(const rdf::TripleStore& store);

  plan::PlanOp plan(const sparql::Query& query) const;
  QueryResult query(const sparql::Query& query);
  /// Deploys a plan with home hosts assigned and collects its output.
  QueryResult execute(const plan::PlanOp& plan);

  UpdateResult apply(const Update& update);
  std::vector<UpdateResult> apply_all(const std::vector<Update>& updates);

  /// Every worker's triples, by host id.
  std::vector<std::vector<rdf::Triple>> export_stores();

  /// Result rows as terms; unbound cells are nullopt.
  std::vector<std::vector<std::optional<rdf::Term>>> decode(const QueryResult& result) const;

  const alloc::Catalog& catalog() const { return catalog_; }
  const rdf::Dictionary& dictionary() const { return dict_; }
  std::string address() const { return listener_.address(); }

 private:
  void accept_loop();
  ControlSession& update_session(std::uint32_t host);
  void ship_new_terms(rdf::TermId from);
  void record(const rdf::Triple& t, bool inserted);
  rdf::Triple encode(const rdf::TermTriple& t);
  std::optional<rdf::Triple> find(const rdf::TermTriple& t) const;
  std::string worker_address(std::uint32_t host) const;

  alloc::Catalog catalog_;
  rdf::Dictionary dict_;
  mutable std::shared_mutex state_;
  Listener listener_;
  ExchangeHub hub_;
  std::atomic<std::uint64_t> next_query_{1};
  std::map<std::uint32_t, std::unique_ptr<ControlSession>> update_sessions_;

  std::mutex open_mutex_;
  std::set<std::shared_ptr<Socket>> open_;
  ThreadSet readers_;
  std::thread acceptor_;
};

/// Workers on loopback ports inside this process.
class LocalCluster {
 public:
  explicit LocalCluster(std::uint32_t hosts);
  ~LocalCluster();

  std::uint32_t size() const { return static_cast<std::uint32_t>(workers_.size()); }
  Worker& worker(std::uint32_t host) { return *workers_.at(host); }
  /// Points the catalog's endpoints at these workers.
  void attach(alloc::Catalog& catalog) const;
  /// Stops one worker, e.g. to exercise failure handling.
  void kill(std::uint32_t host);

 private:
  std::vector<std::unique_ptr<Worker>> workers_;
};

}  // namespace partout::runtime
