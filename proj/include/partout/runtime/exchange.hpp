#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include <json.hpp>

#include "partout/runtime/exec.hpp"
#include "partout/runtime/wire.hpp"

namespace partout::runtime {

/// Pages arriving on one exchange, consumed by a fetcher. The reader that
/// fills it holds the producer connection; acknowledgements go back on it.
class Inbox {
 public:
  void attach(std::shared_ptr<Socket> socket);
  void push(Page page);
  /// Marks the stream broken; a blocked pop() throws ClusterError.
  void fail(const std::string& reason);
  /// Blocks for the next page and acknowledges it to the producer.
  Page pop();
  /// Consumes the rest of the stream, e.g. after a join stopped early.
  void drain();

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<Page> pages_;
  std::shared_ptr<Socket> socket_;
  std::string error_;
  bool failed_ = false;
  bool ended_ = false;
};

/// Consumer side of all exchanges at one node, keyed by (query, exchange).
class ExchangeHub {
 public:
  std::shared_ptr<Inbox> inbox(std::uint64_t query, std::uint32_t exchange);
  /// Serves a producer connection after its HELLO until the end page.
  void serve(std::shared_ptr<Socket> socket, const nlohmann::json& hello);
  /// Fails every inbox of the query.
  void fail_query(std::uint64_t query, const std::string& reason);
  void forget_query(std::uint64_t query);

 private:
  std::mutex mutex_;
  std::map<std::pair<std::uint64_t, std::uint32_t>, std::shared_ptr<Inbox>> inboxes_;
};

/// Fetch operator reading an inbox until the end-flagged page.
OperatorPtr fetch_operator(std::shared_ptr<Inbox> inbox, std::vector<std::string> columns);

struct SendStats {
  std::uint64_t pages = 0;
  std::uint64_t rows = 0;
};

/// Streams an operator's output as pages: full pages as they fill, the end
/// flag on the last one, a single empty end page for no rows. At most
/// kPageCredits pages stay unacknowledged; returns once all are acknowledged.
SendStats send_stream(Operator& op, Socket& socket);

/// Connection threads that are joined when finished or on join().
class ThreadSet {
 public:
  ThreadSet() = default;
  ThreadSet(const ThreadSet&) = delete;
  ThreadSet& operator=(const ThreadSet&) = delete;
  ~ThreadSet() { join(); }

  void spawn(std::function<void()> fn);
  void join();

 private:
  struct Entry {
    std::thread thread;
    std::shared_ptr<std::atomic<bool>> done;
  };
  std::mutex mutex_;
  std::list<Entry> entries_;
};

/// Opens a producer connection: connect plus HELLO naming the exchange.
std::shared_ptr<Socket> open_exchange(const std::string& address, std::uint64_t query, std::uint32_t exchange);

}  // namespace partout::runtime
