#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "partout/rdf/triple_store.hpp"

namespace partout::runtime {

enum class MsgType : std::uint8_t {
  Hello = 1,
  Catalog = 2,
  DictChunk = 3,
  LoadTriples = 4,
  BootstrapDone = 5,
  DeployPlan = 6,
  Start = 7,
  Page = 8,
  EndStream = 9,
  Insert = 10,
  Delete = 11,
  Ack = 12,
  Error = 13,
  StatsReq = 14,
  StatsResp = 15,
};

std::string_view type_name(MsgType type);
bool known_type(std::uint8_t type);

/// Frame header: 4-byte big-endian payload length, then a 1-byte type.
inline constexpr std::size_t kHeaderBytes = 5;
inline constexpr std::uint32_t kMaxPayload = 256u << 20;

inline constexpr std::size_t kPageRows = 1024;
/// Unacknowledged pages a sender may have outstanding on one exchange.
inline constexpr std::size_t kPageCredits = 4;

using Bytes = std::vector<std::uint8_t>;

struct Frame {
  std::uint8_t type = 0;
  Bytes payload;

  MsgType msg() const { return static_cast<MsgType>(type); }
  std::string text() const { return {payload.begin(), payload.end()}; }
  friend bool operator==(const Frame&, const Frame&) = default;
};

Frame make_frame(MsgType type, std::string_view payload);
Frame make_frame(MsgType type, Bytes payload);

Bytes encode_frame(const Frame& frame);
/// Decodes one complete frame; throws ClusterError on a length mismatch.
Frame decode_frame(std::span<const std::uint8_t> bytes);

void put_u32be(Bytes& out, std::uint32_t v);
void put_u64le(Bytes& out, std::uint64_t v);
std::uint32_t get_u32be(const std::uint8_t* p);
std::uint64_t get_u64le(const std::uint8_t* p);

using Row = std::vector<rdf::TermId>;

struct Page {
  bool end = false;
  std::uint32_t arity = 0;
  std::vector<Row> rows;

  friend bool operator==(const Page&, const Page&) = default;
};

/// u8 end flag, u32 BE row count, u32 BE arity, then row-major u64 LE ids.
Bytes encode_page(const Page& page);
Page decode_page(std::span<const std::uint8_t> payload);

/// u32 BE count, then s, p, o as u64 LE per triple.
Bytes encode_triples(std::span<const rdf::Triple> triples);
std::vector<rdf::Triple> decode_triples(std::span<const std::uint8_t> payload);

/// Blocking TCP stream. Move-only; closes on destruction.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& other) noexcept;
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket();

  /// `host:port`; throws ClusterError when unreachable.
  static Socket connect(const std::string& address);

  bool valid() const { return fd_ >= 0; }
  int fd() const { return fd_; }

  void send(const Frame& frame);
  /// nullopt on orderly close before a header; ClusterError on truncation.
  std::optional<Frame> receive();
  /// Wakes any thread blocked on this socket.
  void shutdown();
  void close();

 private:
  int fd_ = -1;
};

class Listener {
 public:
  /// Binds `host:port`; port 0 picks a free one.
  explicit Listener(const std::string& address);
  Listener(const Listener&) = delete;
  Listener& operator=(const Listener&) = delete;
  ~Listener();

  /// Invalid socket once close() was called.
  Socket accept();
  /// Wakes a blocked accept(); safe from any thread.
  void close();
  std::string address() const { return address_; }

 private:
  int fd_ = -1;
  std::atomic<bool> closed_{false};
  std::string address_;
};

}  // namespace partout::runtime
