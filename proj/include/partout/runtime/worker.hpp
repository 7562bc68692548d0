#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <thread>

#include "partout/rdf/dictionary.hpp"
#include "partout/rdf/triple_store.hpp"
#include "partout/runtime/exchange.hpp"

namespace partout::runtime {

/// A storage and execution node. Every accepted connection opens with HELLO:
/// `{"role":"coordinator"}` starts a request/reply control session,
/// `{"role":"exchange","query":Q,"exchange":E}` delivers pages of a remote
/// sub-plan.
class Worker {
 public:
  /// Binds immediately; `listen` may use port 0.
  Worker(std::string listen, std::int32_t host_id = -1);
  ~Worker();
  Worker(const Worker&) = delete;
  Worker& operator=(const Worker&) = delete;

  std::string address() const { return listener_.address(); }
  std::int32_t host_id() const { return host_id_; }

  /// Serves connections on a background thread.
  void start();
  /// Blocks until stop() is called.
  void wait();
  /// Closes the listener and every open connection, then joins all threads.
  void stop();

  const rdf::TripleStore& store() const { return store_; }
  const rdf::Dictionary& dictionary() const { return dict_; }

 private:
  struct Query;

  void accept_loop();
  void handle(std::shared_ptr<Socket> socket);
  void control_session(Socket& socket);
  Frame dispatch(const Frame& request, Socket& socket);
  void start_query(std::uint64_t query, Socket& control);
  void run_subplan(const std::shared_ptr<Query>& q, std::size_t index);

  Listener listener_;
  std::atomic<std::int32_t> host_id_;
  rdf::TripleStore store_;
  rdf::Dictionary dict_;
  ExchangeHub hub_;

  std::mutex mutex_;
  std::map<std::uint64_t, std::shared_ptr<Query>> queries_;
  std::set<std::shared_ptr<Socket>> open_;
  ThreadSet threads_;
  std::thread acceptor_;
  std::atomic<bool> stopping_{false};
  std::mutex stop_mutex_;
  std::condition_variable stopped_cv_;
  bool stopped_ = false;
};

}  // namespace partout::runtime
