// Copyright 2026 The PSFC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Socket deployment: one persistent TCP connection per server, framed with the
// codec in wire.hpp. POSIX only.

#pragma once

#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstdint>
#include <cstring>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "psfc/error.hpp"
#include "psfc/server.hpp"
#include "psfc/transport.hpp"
#include "psfc/wire.hpp"

namespace psfc {

namespace net {

class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  Socket& operator=(Socket&& other) noexcept {
    if (this != &other) {
      reset();
      fd_ = std::exchange(other.fd_, -1);
    }
    return *this;
  }
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket() { reset(); }

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }

  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

  void shutdown() const {
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
  }

  /// False on clean EOF before any byte; throws ChannelClosed on EOF mid-read.
  bool read_exact(std::uint8_t* buf, std::size_t n) const {
    std::size_t got = 0;
    while (got < n) {
      const ssize_t r = ::recv(fd_, buf + got, n - got, 0);
      if (r == 0) {
        if (got == 0) return false;
        throw Error(ErrorCode::kChannelClosed, "peer closed mid-frame");
      }
      if (r < 0) {
        if (errno == EINTR) continue;
        throw Error(ErrorCode::kChannelClosed, std::strerror(errno));
      }
      got += static_cast<std::size_t>(r);
    }
    return true;
  }

  void write_all(std::span<const std::uint8_t> bytes) const {
    std::size_t sent = 0;
    while (sent < bytes.size()) {
      const ssize_t r =
          ::send(fd_, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
      if (r < 0) {
        if (errno == EINTR) continue;
        throw Error(ErrorCode::kChannelClosed, std::strerror(errno));
      }
      sent += static_cast<std::size_t>(r);
    }
  }

 private:
  int fd_ = -1;
};

/// Reads one full frame, or returns an empty vector on clean EOF.
inline std::vector<std::uint8_t> read_frame(const Socket& s) {
  std::vector<std::uint8_t> buf(4);
  if (!s.read_exact(buf.data(), 4)) return {};
  const auto kind = detail::magic_kind(buf);
  buf.resize(*kind == MessageKind::kQuery ? kQueryHeaderSize : kAnswerHeaderSize);
  if (!s.read_exact(buf.data() + 4, buf.size() - 4)) {
    throw Error(ErrorCode::kChannelClosed, "peer closed mid-header");
  }
  const std::size_t have = buf.size();
  const std::size_t len = *frame_length(buf);
  buf.resize(len);
  if (len > have && !s.read_exact(buf.data() + have, len - have)) {
    throw Error(ErrorCode::kChannelClosed, "peer closed mid-payload");
  }
  return buf;
}

inline std::pair<std::string, std::string> split_address(const std::string& addr) {
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "address must be host:port: " + addr);
  }
  return {addr.substr(0, colon), addr.substr(colon + 1)};
}

inline Socket connect_to(const std::string& address) {
  auto [host, port] = split_address(address);
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &res); rc != 0) {
    throw Error(ErrorCode::kChannelClosed, address + ": " + ::gai_strerror(rc));
  }
  Socket s;
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    Socket candidate(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
    if (!candidate.valid()) continue;
    if (::connect(candidate.fd(), ai->ai_addr, ai->ai_addrlen) == 0) {
      s = std::move(candidate);
      break;
    }
  }
  ::freeaddrinfo(res);
  if (!s.valid()) throw Error(ErrorCode::kChannelClosed, "cannot connect to " + address);
  int one = 1;
  ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return s;
}

}  // namespace net

/// Serves one ServerState over TCP. Connections are handled one at a time;
/// each gets a fresh per-connection seq expectation starting at 0.
class TcpServer {
 public:
  /// Binds `host` (IPv4) at `port`; port 0 picks an ephemeral port.
  explicit TcpServer(ServerState state, std::uint16_t port = 0,
                     const std::string& host = "127.0.0.1")
      : state_(std::move(state)) {
    listener_ = net::Socket(::socket(AF_INET, SOCK_STREAM, 0));
    if (!listener_.valid()) throw Error(ErrorCode::kChannelClosed, "socket()");
    int one = 1;
    ::setsockopt(listener_.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    addrinfo hints{};
    hints.ai_family = AF_INET;
    addrinfo* res = nullptr;
    if (::getaddrinfo(host.c_str(), nullptr, &hints, &res) != 0 || res == nullptr) {
      throw Error(ErrorCode::kInvalidArgument, "cannot resolve " + host);
    }
    addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
    ::freeaddrinfo(res);
    if (::bind(listener_.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
        ::listen(listener_.fd(), 4) != 0) {
      throw Error(ErrorCode::kChannelClosed,
                  "bind/listen failed: " + std::string(std::strerror(errno)));
    }
    socklen_t len = sizeof(addr);
    ::getsockname(listener_.fd(), reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
  }

  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  ~TcpServer() { stop(); }

  std::uint16_t port() const { return port_; }
  std::string address() const { return "127.0.0.1:" + std::to_string(port_); }

  void start() {
    worker_ = std::thread([this] { accept_loop(); });
  }

  /// Runs the accept loop on the calling thread until stop() or an accept
  /// failure.
  void serve_forever() { accept_loop(); }

  void stop() {
    if (stopping_.exchange(true)) {
      if (worker_.joinable()) worker_.join();
      return;
    }
    listener_.shutdown();
    {
      std::lock_guard lock(conn_mu_);
      if (active_fd_ >= 0) ::shutdown(active_fd_, SHUT_RDWR);
    }
    if (worker_.joinable()) worker_.join();
  }

  MarginalQueryList marginal() const {
    std::lock_guard lock(state_mu_);
    return state_.marginal();
  }

 private:
  void accept_loop() {
    while (!stopping_) {
      net::Socket conn(::accept(listener_.fd(), nullptr, nullptr));
      if (!conn.valid()) {
        if (errno == EINTR) continue;
        return;
      }
      {
        std::lock_guard lock(conn_mu_);
        active_fd_ = conn.fd();
      }
      try {
        serve_connection(conn);
      } catch (const Error&) {
        // Malformed or rejected input: drop the connection.
      }
      std::lock_guard lock(conn_mu_);
      active_fd_ = -1;
    }
  }

  void serve_connection(const net::Socket& conn) {
    std::uint32_t expected_seq = 0;
    for (;;) {
      auto frame = net::read_frame(conn);
      if (frame.empty()) return;
      WireMessage q = decode_message(frame);
      if (q.kind != MessageKind::kQuery || q.seq != expected_seq) {
        throw Error(ErrorCode::kMalformedFrame, "unexpected frame");
      }
      ++expected_seq;
      WireMessage a;
      a.kind = MessageKind::kAnswer;
      a.seq = q.seq;
      {
        std::lock_guard lock(state_mu_);
        a.payload = state_.serve_query(q.function, q.payload);
      }
      conn.write_all(encode_message(a));
    }
  }

  ServerState state_;
  mutable std::mutex state_mu_;
  net::Socket listener_;
  std::uint16_t port_ = 0;
  std::thread worker_;
  std::atomic<bool> stopping_{false};
  std::mutex conn_mu_;
  int active_fd_ = -1;
};

/// Client side of the socket deployment. The per-server capture is the
/// client's record of what each server acknowledged, which equals the
/// server's marginal list for honest servers.
class TcpTransport final : public Transport {
 public:
  explicit TcpTransport(const std::vector<std::string>& addresses) {
    for (std::size_t i = 0; i < addresses.size(); ++i) {
      conns_.push_back(net::connect_to(addresses[i]));
      next_seq_.push_back(0);
      mirror_.push_back({static_cast<int>(i) + 1, {}});
    }
  }

  int num_servers() const override { return static_cast<int>(conns_.size()); }

  FieldVector send(int server, int function,
                   std::span<const FieldElement> input) override {
    if (closed_) throw Error(ErrorCode::kChannelClosed, "tcp transport closed");
    if (server < 1 || server > num_servers()) {
      throw Error(ErrorCode::kInvalidArgument, "no server " + std::to_string(server));
    }
    const auto idx = static_cast<std::size_t>(server - 1);
    WireMessage q;
    q.kind = MessageKind::kQuery;
    q.seq = next_seq_[idx];
    q.function = static_cast<std::uint16_t>(function);
    q.payload.assign(input.begin(), input.end());
    conns_[idx].write_all(encode_message(q));
    auto frame = net::read_frame(conns_[idx]);
    if (frame.empty()) throw Error(ErrorCode::kChannelClosed, "server closed connection");
    WireMessage a = decode_message(frame);
    if (a.kind != MessageKind::kAnswer || a.seq != q.seq ||
        a.payload.size() != input.size()) {
      throw Error(ErrorCode::kMalformedFrame, "answer does not match query");
    }
    ++next_seq_[idx];
    mirror_[idx].entries.push_back({function, std::move(q.payload)});
    return std::move(a.payload);
  }

  std::vector<MarginalQueryList> capture() const override { return mirror_; }

  void close() override {
    closed_ = true;
    for (auto& c : conns_) c.reset();
  }

 private:
  std::vector<net::Socket> conns_;
  std::vector<std::uint32_t> next_seq_;
  std::vector<MarginalQueryList> mirror_;
  bool closed_ = false;
};

}  // namespace psfc
