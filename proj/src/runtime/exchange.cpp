#include "partout/runtime/exchange.hpp"

#include <fmt/format.h>

#include "partout/error.hpp"

namespace partout::runtime {

void Inbox::attach(std::shared_ptr<Socket> socket) {
  std::lock_guard lock(mutex_);
  socket_ = std::move(socket);
}

void Inbox::push(Page page) {
  {
    std::lock_guard lock(mutex_);
    pages_.push_back(std::move(page));
  }
  cv_.notify_all();
}

void Inbox::fail(const std::string& reason) {
  {
    std::lock_guard lock(mutex_);
    if (failed_) return;
    failed_ = true;
    error_ = reason;
  }
  cv_.notify_all();
}

Page Inbox::pop() {
  std::shared_ptr<Socket> socket;
  Page page;
  {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return !pages_.empty() || failed_; });
    if (pages_.empty()) throw ClusterError("exchange aborted: " + error_);
    page = std::move(pages_.front());
    pages_.pop_front();
    socket = socket_;
    ended_ = page.end;
  }
  if (socket) {
    try {
      socket->send(make_frame(MsgType::Ack, Bytes{}));
    } catch (const ClusterError&) {
    }
  }
  return page;
}

void Inbox::drain() {
  while (true) {
    {
      std::lock_guard lock(mutex_);
      if (ended_ || failed_) return;
    }
    try {
      pop();
    } catch (const ClusterError&) {
      return;
    }
  }
}

std::shared_ptr<Inbox> ExchangeHub::inbox(std::uint64_t query, std::uint32_t exchange) {
  std::lock_guard lock(mutex_);
  auto& slot = inboxes_[{query, exchange}];
  if (!slot) slot = std::make_shared<Inbox>();
  return slot;
}

void ExchangeHub::serve(std::shared_ptr<Socket> socket, const nlohmann::json& hello) {
  std::uint64_t query = hello.at("query").get<std::uint64_t>();
  std::uint32_t exchange = hello.at("exchange").get<std::uint32_t>();
  auto box = inbox(query, exchange);
  box->attach(socket);
  try {
    while (true) {
      auto frame = socket->receive();
      if (!frame) {
        box->fail(fmt::format("producer of exchange {} disconnected", exchange));
        return;
      }
      if (frame->msg() == MsgType::Error) {
        box->fail(frame->text());
        return;
      }
      if (frame->msg() != MsgType::Page) {
        box->fail(fmt::format("unexpected {} on exchange {}", type_name(frame->msg()), exchange));
        return;
      }
      auto page = decode_page(frame->payload);
      bool end = page.end;
      box->push(std::move(page));
      if (end) return;
    }
  } catch (const ClusterError& e) {
    box->fail(e.what());
  }
}

void ExchangeHub::fail_query(std::uint64_t query, const std::string& reason) {
  std::lock_guard lock(mutex_);
  for (auto it = inboxes_.lower_bound({query, 0}); it != inboxes_.end() && it->first.first == query; ++it) {
    it->second->fail(reason);
  }
}

void ExchangeHub::forget_query(std::uint64_t query) {
  std::lock_guard lock(mutex_);
  auto it = inboxes_.lower_bound({query, 0});
  while (it != inboxes_.end() && it->first.first == query) it = inboxes_.erase(it);
}

namespace {

class FetchOp : public Operator {
 public:
  FetchOp(std::shared_ptr<Inbox> inbox, std::vector<std::string> cols)
      : Operator(std::move(cols)), inbox_(std::move(inbox)) {}

  bool next(Row& row) override {
    while (pos_ >= page_.rows.size()) {
      if (done_) return false;
      page_ = inbox_->pop();
      pos_ = 0;
      done_ = page_.end;
      if (page_.arity != columns().size()) {
        throw ClusterError(fmt::format("page arity {} does not match {} columns", page_.arity, columns().size()));
      }
    }
    row = std::move(page_.rows[pos_++]);
    return true;
  }

 private:
  std::shared_ptr<Inbox> inbox_;
  Page page_;
  std::size_t pos_ = 0;
  bool done_ = false;
};

}  // namespace

OperatorPtr fetch_operator(std::shared_ptr<Inbox> inbox, std::vector<std::string> columns) {
  return std::make_unique<FetchOp>(std::move(inbox), std::move(columns));
}

SendStats send_stream(Operator& op, Socket& socket) {
  SendStats stats;
  std::size_t in_flight = 0;
  auto arity = static_cast<std::uint32_t>(op.columns().size());
  auto await_ack = [&] {
    auto frame = socket.receive();
    if (!frame) throw ClusterError("consumer closed the exchange");
    if (frame->msg() == MsgType::Error) throw ClusterError("consumer failed: " + frame->text());
    if (frame->msg() != MsgType::Ack) throw ClusterError(fmt::format("unexpected {} on exchange", type_name(frame->msg())));
    --in_flight;
  };
  auto send_page = [&](Page& page) {
    while (in_flight >= kPageCredits) await_ack();
    socket.send(make_frame(MsgType::Page, encode_page(page)));
    ++stats.pages;
    stats.rows += page.rows.size();
    ++in_flight;
  };
  Page page{false, arity, {}};
  Row row;
  bool more = op.next(row);
  while (more) {
    page.rows.push_back(std::move(row));
    row.clear();
    more = op.next(row);
    if (page.rows.size() == kPageRows && more) {
      send_page(page);
      page.rows.clear();
    }
  }
  page.end = true;
  send_page(page);
  while (in_flight > 0) await_ack();
  return stats;
}

void ThreadSet::spawn(std::function<void()> fn) {
  std::lock_guard lock(mutex_);
  for (auto it = entries_.begin(); it != entries_.end();) {
    if (*it->done) {
      it->thread.join();
      it = entries_.erase(it);
    } else {
      ++it;
    }
  }
  auto done = std::make_shared<std::atomic<bool>>(false);
  entries_.push_back({std::thread([fn = std::move(fn), done] {
                        fn();
                        *done = true;
                      }),
                      done});
}

void ThreadSet::join() {
  std::list<Entry> entries;
  {
    std::lock_guard lock(mutex_);
    entries.swap(entries_);
  }
  for (auto& e : entries) e.thread.join();
}

std::shared_ptr<Socket> open_exchange(const std::string& address, std::uint64_t query, std::uint32_t exchange) {
  auto socket = std::make_shared<Socket>(Socket::connect(address));
  nlohmann::json hello{{"role", "exchange"}, {"query", query}, {"exchange", exchange}};
  socket->send(make_frame(MsgType::Hello, hello.dump()));
  return socket;
}

}  // namespace partout::runtime
