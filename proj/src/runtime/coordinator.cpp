#include "partout/runtime/coordinator.hpp"

#include <algorithm>
#include <istream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "partout/error.hpp"

namespace partout::runtime {

using nlohmann::json;

namespace {

constexpr std::size_t kLoadBatch = 8192;
constexpr std::size_t kDictChunkBytes = 1 << 20;

json reply_json(const Frame& f) {
  try {
    return json::parse(f.payload.begin(), f.payload.end());
  } catch (const json::exception& e) {
    throw ClusterError(fmt::format("malformed {} reply: {}", type_name(f.msg()), e.what()));
  }
}

std::string error_text(const Frame& f) {
  try {
    return json::parse(f.payload.begin(), f.payload.end()).at("message").get<std::string>();
  } catch (const json::exception&) {
    return f.text();
  }
}

}  // namespace

ControlSession::ControlSession(const std::string& address, std::uint32_t host)
    : socket_(Socket::connect(address)), host_(host) {
  socket_.send(make_frame(MsgType::Hello, json{{"role", "coordinator"}}.dump()));
  receive();
}

Frame ControlSession::receive() {
  auto frame = socket_.receive();
  if (!frame) throw ClusterError(fmt::format("host {} closed the connection", host_));
  if (frame->msg() == MsgType::Error) throw ClusterError(fmt::format("host {}: {}", host_, error_text(*frame)));
  return std::move(*frame);
}

Frame ControlSession::request(const Frame& frame) {
  socket_.send(frame);
  return receive();
}

std::vector<Update> parse_updates(std::istream& in) {
  std::vector<Update> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view v = line;
    while (!v.empty() && (v.front() == ' ' || v.front() == '\t')) v.remove_prefix(1);
    if (v.empty() || v.front() == '#') continue;
    char sign = v.front();
    if (sign != '+' && sign != '-') throw ParseError(line_no, "update lines start with '+' or '-'");
    v.remove_prefix(1);
    auto triple = rdf::parse_ntriples_line(v, line_no);
    if (!triple) throw ParseError(line_no, "update line without a triple");
    out.push_back({sign == '+' ? UpdateKind::Insert : UpdateKind::Delete, std::move(*triple), {}});
  }
  return out;
}

Coordinator::Coordinator(alloc::Catalog catalog, rdf::Dictionary dict, const std::string& listen)
    : catalog_(std::move(catalog)), dict_(std::move(dict)), listener_(listen) {
  acceptor_ = std::thread([this] { accept_loop(); });
}

Coordinator::~Coordinator() {
  listener_.close();
  if (acceptor_.joinable()) acceptor_.join();
  {
    std::lock_guard lock(open_mutex_);
    for (const auto& s : open_) s->shutdown();
  }
  readers_.join();
}

void Coordinator::accept_loop() {
  while (true) {
    Socket s = listener_.accept();
    if (!s.valid()) return;
    auto socket = std::make_shared<Socket>(std::move(s));
    {
      std::lock_guard lock(open_mutex_);
      open_.insert(socket);
    }
    readers_.spawn([this, socket] {
      try {
        auto hello = socket->receive();
        if (hello && hello->msg() == MsgType::Hello) {
          auto body = reply_json(*hello);
          if (body.value("role", "") == "exchange") hub_.serve(socket, body);
        }
      } catch (const std::exception&) {
      }
      std::lock_guard lock(open_mutex_);
      open_.erase(socket);
    });
  }
}

std::string Coordinator::worker_address(std::uint32_t host) const {
  for (const auto& h : catalog_.hosts) {
    if (h.id == host && !h.address.empty()) return h.address;
  }
  throw ClusterError(fmt::format("no address for host {}", host));
}

void Coordinator::bootstrap(const rdf::TripleStore& store) {
  std::unique_lock lock(state_);
  std::uint32_t n = std::max<std::uint32_t>(1, catalog_.host_count);
  std::vector<std::unique_ptr<ControlSession>> sessions;
  for (std::uint32_t h = 0; h < n; ++h) {
    sessions.push_back(std::make_unique<ControlSession>(worker_address(h), h));
    sessions.back()->request(make_frame(MsgType::Catalog, json{{"host", h}}.dump()));
  }
  std::ostringstream dict_text;
  dict_.write(dict_text);
  std::string text = dict_text.str();
  for (std::size_t pos = 0; pos < text.size();) {
    std::size_t end = std::min(text.size(), pos + kDictChunkBytes);
    if (end < text.size()) end = text.rfind('\n', end - 1) + 1;
    if (end <= pos) end = text.find('\n', pos) + 1;
    for (auto& s : sessions) s->request(make_frame(MsgType::DictChunk, std::string_view(text).substr(pos, end - pos)));
    pos = end;
  }

  std::vector<std::vector<rdf::Triple>> batches(n);
  std::vector<std::uint64_t> routed(n, 0);
  auto flush = [&](std::uint32_t h) {
    if (batches[h].empty()) return;
    sessions[h]->request(make_frame(MsgType::LoadTriples, encode_triples(batches[h])));
    batches[h].clear();
  };
  for (const auto& t : store.triples()) {
    auto h = catalog_.route(t, dict_);
    if (h >= n) throw ClusterError(fmt::format("triple routed to unknown host {}", h));
    batches[h].push_back(t);
    ++routed[h];
    if (batches[h].size() >= kLoadBatch) flush(h);
  }
  for (std::uint32_t h = 0; h < n; ++h) flush(h);
  std::uint64_t total = 0;
  for (std::uint32_t h = 0; h < n; ++h) {
    auto body = reply_json(sessions[h]->request(make_frame(MsgType::BootstrapDone, "")));
    total += body.at("triples").get<std::uint64_t>();
    std::uint64_t capacity = h < catalog_.hosts.size() ? catalog_.hosts[h].capacity : 0;
    double bytes = static_cast<double>(routed[h]) * catalog_.triple_bytes;
    if (capacity > 0 && bytes > static_cast<double>(capacity)) {
      throw ClusterError(fmt::format("host {} capacity exceeded: {:.0f} bytes routed, capacity {}", h, bytes, capacity));
    }
  }
  if (total != store.size()) {
    throw ClusterError(fmt::format("bootstrap placed {} triples for {} input triples", total, store.size()));
  }
  alloc::compute_stats(catalog_, store, dict_);
}

plan::PlanOp Coordinator::plan(const sparql::Query& query) const {
  std::shared_lock lock(state_);
  plan::Planner planner(catalog_, dict_);
  return planner.plan(query);
}

QueryResult Coordinator::query(const sparql::Query& query) {
  std::shared_lock lock(state_);
  plan::Planner planner(catalog_, dict_);
  auto p = planner.plan(query);
  lock.unlock();
  return execute(p);
}

QueryResult Coordinator::execute(const plan::PlanOp& plan) {
  std::shared_lock lock(state_);
  std::uint64_t id = next_query_++;
  auto deployment = split_and_deploy(plan, id);
  auto results = hub_.inbox(id, 0);
  struct Forget {
    ExchangeHub& hub;
    std::uint64_t id;
    ~Forget() { hub.forget_query(id); }
  } forget{hub_, id};

  std::map<std::int32_t, std::unique_ptr<ControlSession>> sessions;
  for (auto h : deployment.hosts()) {
    auto host = static_cast<std::uint32_t>(h);
    sessions[h] = std::make_unique<ControlSession>(worker_address(host), host);
  }
  for (auto& [h, session] : sessions) {
    json subs = json::array();
    json consumers = json::object();
    for (const auto* sub : deployment.subplans_at(h)) {
      subs.push_back(to_json(*sub));
      const auto& ex = deployment.exchanges.at(sub->exchange);
      std::string address = ex.consumer == kCoordinator ? listener_.address()
                                                        : worker_address(static_cast<std::uint32_t>(ex.consumer));
      consumers[std::to_string(ex.id)] = {{"address", address}, {"host", ex.consumer}};
    }
    json body{{"query", id}, {"subplans", subs}, {"consumers", consumers}};
    session->request(make_frame(MsgType::DeployPlan, body.dump()));
  }

  std::mutex mutex;
  std::string error;
  QueryResult out;
  out.plan = plan;
  out.columns = plan.columns;
  std::vector<std::thread> waiters;
  for (auto& [h, session] : sessions) {
    session->send(make_frame(MsgType::Start, json{{"query", id}}.dump()));
    waiters.emplace_back([&, s = session.get()] {
      try {
        auto body = reply_json(s->receive());
        std::lock_guard l(mutex);
        out.remote_pages += body.at("remote_pages").get<std::uint64_t>();
      } catch (const std::exception& e) {
        {
          std::lock_guard l(mutex);
          if (error.empty()) error = e.what();
        }
        hub_.fail_query(id, e.what());
      }
    });
  }
  try {
    auto fetch = fetch_operator(results, plan.columns);
    Row row;
    while (fetch->next(row)) out.rows.push_back(row);
  } catch (const std::exception& e) {
    std::lock_guard l(mutex);
    if (error.empty()) error = e.what();
  }
  if (!error.empty()) {
    for (auto& [h, session] : sessions) session->shutdown();
  }
  for (auto& t : waiters) t.join();
  if (!error.empty()) throw ClusterError(fmt::format("query {} aborted: {}", id, error));
  out.result_pages = (out.rows.size() + kPageRows - 1) / kPageRows;
  if (out.result_pages == 0) out.result_pages = 1;
  return out;
}

ControlSession& Coordinator::update_session(std::uint32_t host) {
  auto& slot = update_sessions_[host];
  if (!slot) slot = std::make_unique<ControlSession>(worker_address(host), host);
  return *slot;
}

void Coordinator::ship_new_terms(rdf::TermId from) {
  if (dict_.next_id() == from) return;
  std::ostringstream text;
  dict_.write_from(text, from);
  auto frame = make_frame(MsgType::DictChunk, text.str());
  for (std::uint32_t h = 0; h < std::max<std::uint32_t>(1, catalog_.host_count); ++h) update_session(h).request(frame);
}

rdf::Triple Coordinator::encode(const rdf::TermTriple& t) {
  return {dict_.intern(t[0]), dict_.intern(t[1]), dict_.intern(t[2])};
}

std::optional<rdf::Triple> Coordinator::find(const rdf::TermTriple& t) const {
  auto s = dict_.find(t[0]), p = dict_.find(t[1]), o = dict_.find(t[2]);
  if (!s || !p || !o) return std::nullopt;
  return rdf::Triple{*s, *p, *o};
}

void Coordinator::record(const rdf::Triple& t, bool inserted) {
  const auto& frag = catalog_.fragmentation;
  const auto& s = dict_.term(t.s);
  const auto& p = dict_.term(t.p);
  const auto& o = dict_.term(t.o);
  auto id = frag.fragment_of(s, p, o);
  auto& stats = catalog_.stats[id];
  if (inserted) {
    stats.record_insert(t);
  } else {
    stats.record_erase(t);
  }
  if (id != frag.remainder_id()) return;
  if (auto mask = frag.mask_of(s, p, o)) {
    if (inserted) {
      ++catalog_.remainder_strays[mask];
    } else if (auto it = catalog_.remainder_strays.find(mask); it != catalog_.remainder_strays.end() && --it->second == 0) {
      catalog_.remainder_strays.erase(it);
    }
  }
}

UpdateResult Coordinator::apply(const Update& update) {
  std::unique_lock lock(state_);
  UpdateResult result;
  auto send = [&](MsgType type, std::uint32_t host, const rdf::Triple& t) {
    std::vector<rdf::Triple> one{t};
    std::uint64_t changed;
    try {
      changed = reply_json(update_session(host).request(make_frame(type, encode_triples(one)))).at("changed").get<std::uint64_t>();
    } catch (const ClusterError&) {
      update_sessions_.erase(host);
      throw;
    }
    if (changed > 0) {
      record(t, type == MsgType::Insert);
      result.changed += changed;
      if (std::find(result.hosts.begin(), result.hosts.end(), host) == result.hosts.end()) result.hosts.push_back(host);
    }
    return changed > 0;
  };
  auto insert = [&](const rdf::TermTriple& terms) {
    auto from = dict_.next_id();
    auto t = encode(terms);
    ship_new_terms(from);
    return std::pair{t, send(MsgType::Insert, catalog_.route(t, dict_), t)};
  };

  switch (update.kind) {
    case UpdateKind::Insert:
      insert(update.triple);
      break;
    case UpdateKind::Delete:
      if (auto t = find(update.triple)) send(MsgType::Delete, catalog_.route(*t, dict_), *t);
      break;
    case UpdateKind::Modify: {
      auto old = find(update.triple);
      std::optional<std::uint32_t> old_host;
      if (old) old_host = catalog_.route(*old, dict_);
      auto from = dict_.next_id();
      auto target = encode(update.target);
      auto new_host = catalog_.route(target, dict_);
      // Connect to both hosts before changing anything.
      if (old_host) update_session(*old_host);
      update_session(new_host);
      ship_new_terms(from);
      bool removed = old && send(MsgType::Delete, *old_host, *old);
      try {
        send(MsgType::Insert, new_host, target);
      } catch (const ClusterError& e) {
        if (removed) send(MsgType::Insert, *old_host, *old);
        throw ClusterError(std::string("modify rolled back: ") + e.what());
      }
      break;
    }
  }
  std::sort(result.hosts.begin(), result.hosts.end());
  return result;
}

std::vector<UpdateResult> Coordinator::apply_all(const std::vector<Update>& updates) {
  std::vector<UpdateResult> out;
  out.reserve(updates.size());
  for (const auto& u : updates) out.push_back(apply(u));
  return out;
}

std::vector<std::vector<rdf::Triple>> Coordinator::export_stores() {
  std::shared_lock lock(state_);
  std::vector<std::vector<rdf::Triple>> out;
  for (std::uint32_t h = 0; h < std::max<std::uint32_t>(1, catalog_.host_count); ++h) {
    ControlSession session(worker_address(h), h);
    auto reply = session.request(make_frame(MsgType::StatsReq, "export"));
    if (reply.msg() != MsgType::StatsResp) throw ClusterError("unexpected reply to STATS_REQ");
    out.push_back(decode_triples(reply.payload));
  }
  return out;
}

std::vector<std::vector<std::optional<rdf::Term>>> Coordinator::decode(const QueryResult& result) const {
  std::shared_lock lock(state_);
  std::vector<std::vector<std::optional<rdf::Term>>> out;
  out.reserve(result.rows.size());
  for (const auto& row : result.rows) {
    auto& r = out.emplace_back();
    for (auto id : row) r.push_back(id == rdf::kUnassigned ? std::nullopt : std::optional(dict_.term(id)));
  }
  return out;
}

LocalCluster::LocalCluster(std::uint32_t hosts) {
  for (std::uint32_t h = 0; h < hosts; ++h) {
    workers_.push_back(std::make_unique<Worker>("127.0.0.1:0", static_cast<std::int32_t>(h)));
    workers_.back()->start();
  }
}

LocalCluster::~LocalCluster() {
  for (auto& w : workers_) w->stop();
}

void LocalCluster::attach(alloc::Catalog& catalog) const {
  if (catalog.host_count > workers_.size()) {
    throw ClusterError(fmt::format("catalog needs {} hosts, cluster has {}", catalog.host_count, workers_.size()));
  }
  catalog.hosts.resize(std::max<std::size_t>(catalog.hosts.size(), catalog.host_count));
  for (std::uint32_t h = 0; h < catalog.host_count; ++h) {
    catalog.hosts[h].id = h;
    catalog.hosts[h].address = workers_[h]->address();
  }
}

void LocalCluster::kill(std::uint32_t host) {
  workers_.at(host)->stop();
}

}  // namespace partout::runtime
