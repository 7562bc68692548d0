#include "partout/runtime/worker.hpp"

#include <sstream>

#include <fmt/format.h>

#include "partout/error.hpp"
#include "partout/runtime/deploy.hpp"

namespace partout::runtime {

using nlohmann::json;

struct Worker::Query {
  std::uint64_t id = 0;
  std::vector<SubPlan> subplans;
  std::map<std::uint32_t, std::pair<std::string, std::int32_t>> consumers;

  std::mutex mutex;
  std::vector<std::shared_ptr<Socket>> senders;
  std::string error;
  std::uint64_t remote_pages = 0;
  std::uint64_t pages = 0;
};

namespace {

Frame ack(const json& body = json::object()) {
  return make_frame(MsgType::Ack, body.dump());
}

Frame error_frame(const std::string& message, std::optional<std::uint64_t> query = std::nullopt) {
  json body{{"message", message}};
  if (query) body["query"] = *query;
  return make_frame(MsgType::Error, body.dump());
}

json parse_json(const Frame& f) {
  try {
    return json::parse(f.payload.begin(), f.payload.end());
  } catch (const json::exception& e) {
    throw ClusterError(fmt::format("malformed {} payload: {}", type_name(f.msg()), e.what()));
  }
}

}  // namespace

Worker::Worker(std::string listen, std::int32_t host_id) : listener_(listen), host_id_(host_id) {}

Worker::~Worker() {
  stop();
}

void Worker::start() {
  acceptor_ = std::thread([this] { accept_loop(); });
}

void Worker::wait() {
  std::unique_lock lock(stop_mutex_);
  stopped_cv_.wait(lock, [&] { return stopped_; });
}

void Worker::stop() {
  if (stopping_.exchange(true)) return;
  listener_.close();
  if (acceptor_.joinable()) acceptor_.join();
  std::vector<std::uint64_t> running;
  {
    std::lock_guard lock(mutex_);
    for (const auto& s : open_) s->shutdown();
    for (auto& [id, q] : queries_) {
      running.push_back(id);
      std::lock_guard ql(q->mutex);
      for (const auto& s : q->senders) s->shutdown();
    }
  }
  for (auto id : running) hub_.fail_query(id, "worker stopping");
  threads_.join();
  {
    std::lock_guard lock(stop_mutex_);
    stopped_ = true;
  }
  stopped_cv_.notify_all();
}

void Worker::accept_loop() {
  while (true) {
    Socket s = listener_.accept();
    if (!s.valid()) return;
    auto socket = std::make_shared<Socket>(std::move(s));
    {
      std::lock_guard lock(mutex_);
      if (stopping_) return;
      open_.insert(socket);
    }
    threads_.spawn([this, socket] {
      handle(socket);
      std::lock_guard lock(mutex_);
      open_.erase(socket);
    });
  }
}

void Worker::handle(std::shared_ptr<Socket> socket) {
  try {
    auto hello = socket->receive();
    if (!hello) return;
    if (hello->msg() != MsgType::Hello) {
      socket->send(error_frame(fmt::format("expected HELLO, got {}", type_name(hello->msg()))));
      return;
    }
    auto body = parse_json(*hello);
    auto role = body.value("role", "");
    if (role == "exchange") {
      hub_.serve(socket, body);
    } else if (role == "coordinator") {
      socket->send(ack({{"host", host_id_.load()}}));
      control_session(*socket);
    } else {
      socket->send(error_frame("unknown role '" + role + "'"));
    }
  } catch (const std::exception&) {
  }
}

void Worker::control_session(Socket& socket) {
  while (auto frame = socket.receive()) {
    if (frame->msg() == MsgType::Start) {
      std::uint64_t query = 0;
      try {
        query = parse_json(*frame).at("query").get<std::uint64_t>();
      } catch (const std::exception& e) {
        socket.send(error_frame(e.what()));
        continue;
      }
      start_query(query, socket);
      continue;
    }
    Frame reply;
    try {
      reply = dispatch(*frame, socket);
    } catch (const std::exception& e) {
      reply = error_frame(e.what());
    }
    socket.send(reply);
  }
}

Frame Worker::dispatch(const Frame& request, Socket&) {
  if (!known_type(request.type)) return error_frame(fmt::format("unknown message type {}", request.type));
  switch (request.msg()) {
    case MsgType::Hello:
      return ack({{"host", host_id_.load()}});
    case MsgType::Catalog: {
      auto body = parse_json(request);
      host_id_ = body.at("host").get<std::int32_t>();
      return ack({{"host", host_id_.load()}});
    }
    case MsgType::DictChunk: {
      std::istringstream in(request.text());
      dict_.append(in);
      return ack({{"terms", dict_.size()}});
    }
    case MsgType::LoadTriples:
    case MsgType::Insert: {
      auto triples = decode_triples(request.payload);
      std::uint64_t changed = 0;
      for (const auto& t : triples) changed += store_.insert(t);
      return ack({{"changed", changed}, {"triples", store_.size()}});
    }
    case MsgType::Delete: {
      auto triples = decode_triples(request.payload);
      std::uint64_t changed = 0;
      for (const auto& t : triples) changed += store_.erase(t);
      return ack({{"changed", changed}, {"triples", store_.size()}});
    }
    case MsgType::BootstrapDone:
      return ack({{"triples", store_.size()}, {"terms", dict_.size()}});
    case MsgType::StatsReq: {
      if (request.text() == "export") {
        auto all = store_.triples();
        return make_frame(MsgType::StatsResp, encode_triples(all));
      }
      json body{{"host", host_id_.load()}, {"triples", store_.size()}, {"terms", dict_.size()}};
      return make_frame(MsgType::StatsResp, body.dump());
    }
    case MsgType::DeployPlan: {
      auto body = parse_json(request);
      auto q = std::make_shared<Query>();
      try {
        q->id = body.at("query").get<std::uint64_t>();
        for (const auto& s : body.at("subplans")) q->subplans.push_back(subplan_from_json(s));
        for (const auto& [ex, c] : body.at("consumers").items()) {
          q->consumers[static_cast<std::uint32_t>(std::stoul(ex))] = {c.at("address").get<std::string>(),
                                                                      c.at("host").get<std::int32_t>()};
        }
      } catch (const json::exception& e) {
        throw ClusterError(std::string("malformed deployment: ") + e.what());
      }
      for (const auto& s : q->subplans) {
        if (!q->consumers.contains(s.exchange)) {
          throw ClusterError(fmt::format("deployment lacks a consumer for exchange {}", s.exchange));
        }
      }
      std::lock_guard lock(mutex_);
      queries_[q->id] = q;
      return ack({{"query", q->id}, {"subplans", q->subplans.size()}});
    }
    default:
      return error_frame(fmt::format("unexpected {} on a control session", type_name(request.msg())));
  }
}

void Worker::start_query(std::uint64_t id, Socket& control) {
  std::shared_ptr<Query> q;
  {
    std::lock_guard lock(mutex_);
    auto it = queries_.find(id);
    if (it != queries_.end()) q = it->second;
  }
  if (!q) {
    control.send(error_frame(fmt::format("query {} was not deployed", id), id));
    return;
  }
  std::vector<std::thread> runners;
  for (std::size_t i = 0; i < q->subplans.size(); ++i) runners.emplace_back([this, q, i] { run_subplan(q, i); });
  for (auto& t : runners) t.join();
  {
    std::lock_guard lock(mutex_);
    queries_.erase(id);
  }
  hub_.forget_query(id);
  if (!q->error.empty()) {
    control.send(error_frame(q->error, id));
  } else {
    json body{{"query", id}, {"host", host_id_.load()}, {"remote_pages", q->remote_pages}, {"pages", q->pages}};
    control.send(make_frame(MsgType::EndStream, body.dump()));
  }
}

void Worker::run_subplan(const std::shared_ptr<Query>& q, std::size_t index) {
  const SubPlan& sub = q->subplans[index];
  const auto& [address, consumer] = q->consumers.at(sub.exchange);
  std::shared_ptr<Socket> out;
  std::vector<std::shared_ptr<Inbox>> inputs;
  auto cancel = [&](const std::string& message) {
    std::lock_guard lock(q->mutex);
    if (q->error.empty()) q->error = fmt::format("host {}: {}", host_id_.load(), message);
    for (const auto& s : q->senders) {
      if (s != out) s->shutdown();
    }
  };
  try {
    out = open_exchange(address, q->id, sub.exchange);
    {
      std::lock_guard lock(q->mutex);
      q->senders.push_back(out);
    }
    ExecContext ctx{&store_, &dict_, [&](const plan::PlanOp& fetch) {
                      auto box = hub_.inbox(q->id, fetch.exchange);
                      inputs.push_back(box);
                      return fetch_operator(box, fetch.columns);
                    }};
    auto root = build_operator(sub.plan, ctx);
    auto stats = send_stream(*root, *out);
    for (const auto& box : inputs) box->drain();
    std::lock_guard lock(q->mutex);
    q->pages += stats.pages;
    if (consumer != kCoordinator) q->remote_pages += stats.pages;
  } catch (const std::exception& e) {
    if (out) {
      try {
        out->send(error_frame(e.what(), q->id));
      } catch (const std::exception&) {
      }
    }
    hub_.fail_query(q->id, e.what());
    cancel(e.what());
  }
}

}  // namespace partout::runtime
