#include "partout/runtime/wire.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include <fmt/format.h>

#include "partout/error.hpp"

namespace partout::runtime {

namespace {

constexpr std::string_view kTypeNames[] = {"?",          "HELLO",       "CATALOG",   "DICT_CHUNK",
                                           "LOAD_TRIPLES", "BOOTSTRAP_DONE", "DEPLOY_PLAN", "START",
                                           "PAGE",       "END_STREAM",  "INSERT",    "DELETE",
                                           "ACK",        "ERROR",       "STATS_REQ", "STATS_RESP"};

std::pair<std::string, std::string> split_address(const std::string& address) {
  auto colon = address.rfind(':');
  if (colon == std::string::npos) throw ClusterError("address without port: '" + address + "'");
  return {address.substr(0, colon), address.substr(colon + 1)};
}

void write_all(int fd, const std::uint8_t* data, std::size_t n) {
  while (n > 0) {
    ssize_t w = ::send(fd, data, n, MSG_NOSIGNAL);
    if (w < 0) {
      if (errno == EINTR) continue;
      throw ClusterError(fmt::format("send failed: {}", std::strerror(errno)));
    }
    data += w;
    n -= static_cast<std::size_t>(w);
  }
}

/// Bytes read before EOF.
std::size_t read_all(int fd, std::uint8_t* data, std::size_t n) {
  std::size_t got = 0;
  while (got < n) {
    ssize_t r = ::recv(fd, data + got, n - got, 0);
    if (r < 0) {
      if (errno == EINTR) continue;
      throw ClusterError(fmt::format("receive failed: {}", std::strerror(errno)));
    }
    if (r == 0) break;
    got += static_cast<std::size_t>(r);
  }
  return got;
}

}  // namespace

std::string_view type_name(MsgType type) {
  auto i = static_cast<std::size_t>(type);
  return i < std::size(kTypeNames) ? kTypeNames[i] : "?";
}

bool known_type(std::uint8_t type) {
  return type >= 1 && type <= 15;
}

Frame make_frame(MsgType type, std::string_view payload) {
  return {static_cast<std::uint8_t>(type), Bytes(payload.begin(), payload.end())};
}

Frame make_frame(MsgType type, Bytes payload) {
  return {static_cast<std::uint8_t>(type), std::move(payload)};
}

void put_u32be(Bytes& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void put_u64le(Bytes& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32be(const std::uint8_t* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | p[3];
}

std::uint64_t get_u64le(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

Bytes encode_frame(const Frame& frame) {
  if (frame.payload.size() > kMaxPayload) throw ClusterError("frame payload too large");
  Bytes out;
  out.reserve(kHeaderBytes + frame.payload.size());
  put_u32be(out, static_cast<std::uint32_t>(frame.payload.size()));
  out.push_back(frame.type);
  out.insert(out.end(), frame.payload.begin(), frame.payload.end());
  return out;
}

Frame decode_frame(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderBytes) throw ClusterError("truncated frame header");
  std::uint32_t n = get_u32be(bytes.data());
  if (bytes.size() != kHeaderBytes + n) {
    throw ClusterError(fmt::format("frame length {} does not match {} payload bytes", n, bytes.size() - kHeaderBytes));
  }
  return {bytes[4], Bytes(bytes.begin() + kHeaderBytes, bytes.end())};
}

Bytes encode_page(const Page& page) {
  Bytes out;
  out.reserve(9 + page.rows.size() * page.arity * 8);
  out.push_back(page.end ? 1 : 0);
  put_u32be(out, static_cast<std::uint32_t>(page.rows.size()));
  put_u32be(out, page.arity);
  for (const auto& row : page.rows) {
    if (row.size() != page.arity) throw ClusterError("row arity does not match page arity");
    for (auto id : row) put_u64le(out, id);
  }
  return out;
}

Page decode_page(std::span<const std::uint8_t> payload) {
  if (payload.size() < 9) throw ClusterError("truncated page header");
  Page page;
  if (payload[0] > 1) throw ClusterError("bad page end flag");
  page.end = payload[0] == 1;
  std::uint32_t count = get_u32be(payload.data() + 1);
  page.arity = get_u32be(payload.data() + 5);
  if (count > kPageRows) throw ClusterError(fmt::format("page of {} rows exceeds {}", count, kPageRows));
  std::size_t want = 9 + std::size_t{count} * page.arity * 8;
  if (payload.size() != want) throw ClusterError("page payload size does not match its header");
  const std::uint8_t* p = payload.data() + 9;
  page.rows.resize(count);
  for (auto& row : page.rows) {
    row.resize(page.arity);
    for (auto& id : row) {
      id = get_u64le(p);
      p += 8;
    }
  }
  return page;
}

Bytes encode_triples(std::span<const rdf::Triple> triples) {
  Bytes out;
  out.reserve(4 + triples.size() * 24);
  put_u32be(out, static_cast<std::uint32_t>(triples.size()));
  for (const auto& t : triples) {
    put_u64le(out, t.s);
    put_u64le(out, t.p);
    put_u64le(out, t.o);
  }
  return out;
}

std::vector<rdf::Triple> decode_triples(std::span<const std::uint8_t> payload) {
  if (payload.size() < 4) throw ClusterError("truncated triple batch");
  std::uint32_t n = get_u32be(payload.data());
  if (payload.size() != 4 + std::size_t{n} * 24) throw ClusterError("triple batch size does not match its count");
  std::vector<rdf::Triple> out(n);
  const std::uint8_t* p = payload.data() + 4;
  for (auto& t : out) {
    t.s = get_u64le(p);
    t.p = get_u64le(p + 8);
    t.o = get_u64le(p + 16);
    p += 24;
  }
  return out;
}

Socket::Socket(Socket&& other) noexcept : fd_(other.fd_) {
  other.fd_ = -1;
}

Socket& Socket::operator=(Socket&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = other.fd_;
    other.fd_ = -1;
  }
  return *this;
}

Socket::~Socket() {
  close();
}

Socket Socket::connect(const std::string& address) {
  auto [host, port] = split_address(address);
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &res); rc != 0) {
    throw ClusterError(fmt::format("cannot resolve {}: {}", address, ::gai_strerror(rc)));
  }
  int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  if (fd < 0) {
    ::freeaddrinfo(res);
    throw ClusterError(fmt::format("socket failed: {}", std::strerror(errno)));
  }
  if (::connect(fd, res->ai_addr, res->ai_addrlen) != 0) {
    int err = errno;
    ::freeaddrinfo(res);
    ::close(fd);
    throw ClusterError(fmt::format("cannot connect to {}: {}", address, std::strerror(err)));
  }
  ::freeaddrinfo(res);
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return Socket(fd);
}

void Socket::send(const Frame& frame) {
  if (fd_ < 0) throw ClusterError("send on closed socket");
  auto bytes = encode_frame(frame);
  write_all(fd_, bytes.data(), bytes.size());
}

std::optional<Frame> Socket::receive() {
  if (fd_ < 0) throw ClusterError("receive on closed socket");
  std::uint8_t header[kHeaderBytes];
  std::size_t got = read_all(fd_, header, kHeaderBytes);
  if (got == 0) return std::nullopt;
  if (got < kHeaderBytes) throw ClusterError("connection closed inside a frame header");
  std::uint32_t n = get_u32be(header);
  if (n > kMaxPayload) throw ClusterError(fmt::format("frame payload of {} bytes exceeds limit", n));
  Frame frame{header[4], Bytes(n)};
  if (read_all(fd_, frame.payload.data(), n) != n) throw ClusterError("connection closed inside a frame payload");
  return frame;
}

void Socket::shutdown() {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

void Socket::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

Listener::Listener(const std::string& address) {
  auto [host, port] = split_address(address);
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw ClusterError(fmt::format("socket failed: {}", std::strerror(errno)));
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(std::stoi(port)));
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd_);
    throw ClusterError("listen address must be a numeric IPv4 address: '" + address + "'");
  }
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(fd_, 128) != 0) {
    int err = errno;
    ::close(fd_);
    throw ClusterError(fmt::format("cannot listen on {}: {}", address, std::strerror(err)));
  }
  socklen_t len = sizeof addr;
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  address_ = fmt::format("{}:{}", host, ntohs(addr.sin_port));
}

Listener::~Listener() {
  close();
  ::close(fd_);
}

Socket Listener::accept() {
  while (!closed_) {
    int fd = ::accept(fd_, nullptr, nullptr);
    if (fd >= 0) {
      if (closed_) {
        ::close(fd);
        break;
      }
      int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      return Socket(fd);
    }
    if (errno != EINTR && errno != ECONNABORTED) break;
  }
  return Socket();
}

void Listener::close() {
  if (fd_ >= 0 && !closed_.exchange(true)) ::shutdown(fd_, SHUT_RDWR);
}

}  // namespace partout::runtime
