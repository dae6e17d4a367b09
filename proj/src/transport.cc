// Copyright 2026 The secmoe Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "secmoe/transport.h"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>
#include <thread>

namespace secmoe {

std::optional<NetProfile> NetProfile::parse(std::string_view name) {
  if (name == "lan") return lan();
  if (name == "wan") return wan();
  if (name == "none") return std::nullopt;
  SECMOE_THROW(ErrorCode::kInvalidConfig,
               "unknown network profile '{}' (expected lan|wan|none)", name);
}

void NetProfile::validate() const {
  SECMOE_ENFORCE(bandwidth_bits_per_s > 0, ErrorCode::kInvalidConfig,
                 "profile {}: bandwidth must be positive", name);
  SECMOE_ENFORCE(latency_s >= 0, ErrorCode::kInvalidConfig,
                 "profile {}: negative latency", name);
}

ChannelStats operator-(const ChannelStats& a, const ChannelStats& b) {
  ChannelStats d;
  d.bytes_c_to_s = a.bytes_c_to_s - b.bytes_c_to_s;
  d.bytes_s_to_c = a.bytes_s_to_c - b.bytes_s_to_c;
  d.frame_bytes_c_to_s = a.frame_bytes_c_to_s - b.frame_bytes_c_to_s;
  d.frame_bytes_s_to_c = a.frame_bytes_s_to_c - b.frame_bytes_s_to_c;
  d.messages_c_to_s = a.messages_c_to_s - b.messages_c_to_s;
  d.messages_s_to_c = a.messages_s_to_c - b.messages_s_to_c;
  d.rounds = a.rounds - b.rounds;
  return d;
}

double modeled_time(const ChannelStats& stats, const NetProfile& profile) {
  profile.validate();
  return static_cast<double>(stats.rounds) * profile.latency_s +
         8.0 * static_cast<double>(stats.total_bytes()) /
             profile.bandwidth_bits_per_s;
}

// ---------------------------------------------------------------------------
// Endpoint

Endpoint::Endpoint(Role role, std::unique_ptr<Link> link)
    : role_(role), link_(std::move(link)) {}

Endpoint::~Endpoint() {
  if (link_) link_->close();
}

Endpoint::Endpoint(Endpoint&&) noexcept = default;
Endpoint& Endpoint::operator=(Endpoint&&) noexcept = default;

void Endpoint::close() {
  if (link_) link_->close();
}

void Endpoint::account(bool c2s, Tag tag, size_t len) {
  if (c2s) {
    stats_.bytes_c_to_s += len;
    stats_.frame_bytes_c_to_s += kFrameHeaderBytes;
    ++stats_.messages_c_to_s;
  } else {
    stats_.bytes_s_to_c += len;
    stats_.frame_bytes_s_to_c += kFrameHeaderBytes;
    ++stats_.messages_s_to_c;
  }
  if (record_) transcript_.push_back({tag, c2s, len});
}

void Endpoint::send(Tag tag, std::span<const uint8_t> payload) {
  SECMOE_ENFORCE(link_ != nullptr, ErrorCode::kChannelClosed,
                 "send on moved-from endpoint");
  link_->write(Frame{tag, {payload.begin(), payload.end()}});
  const uint64_t stamp = clock_self_ + 1;
  clock_peer_ = std::max(clock_peer_, stamp);
  stats_.rounds = std::max(stats_.rounds, stamp);
  account(role_ == Role::kClient, tag, payload.size());
}

std::vector<uint8_t> Endpoint::recv(Tag tag) {
  SECMOE_ENFORCE(link_ != nullptr, ErrorCode::kChannelClosed,
                 "recv on moved-from endpoint");
  Frame f = link_->read();
  SECMOE_ENFORCE(f.tag == tag, ErrorCode::kProtocol,
                 "{} expected tag {} but received {}", role_name(role_), tag,
                 f.tag);
  const uint64_t stamp = clock_peer_ + 1;
  clock_self_ = std::max(clock_self_, stamp);
  stats_.rounds = std::max(stats_.rounds, stamp);
  account(role_ != Role::kClient, tag, f.payload.size());
  return std::move(f.payload);
}

std::vector<uint8_t> Endpoint::exchange(Tag tag,
                                        std::span<const uint8_t> payload) {
  SECMOE_ENFORCE(link_ != nullptr, ErrorCode::kChannelClosed,
                 "exchange on moved-from endpoint");
  link_->write(Frame{tag, {payload.begin(), payload.end()}});
  Frame f = link_->read();
  SECMOE_ENFORCE(f.tag == tag, ErrorCode::kProtocol,
                 "{} expected tag {} but received {}", role_name(role_), tag,
                 f.tag);
  const uint64_t mine = clock_self_ + 1;
  const uint64_t theirs = clock_peer_ + 1;
  clock_self_ = std::max(clock_self_, theirs);
  clock_peer_ = std::max(clock_peer_, mine);
  stats_.rounds = std::max({stats_.rounds, mine, theirs});
  const bool self_c2s = role_ == Role::kClient;
  // Record in canonical client-then-server order so both transcripts match.
  if (self_c2s) {
    account(true, tag, payload.size());
    account(false, tag, f.payload.size());
  } else {
    account(true, tag, f.payload.size());
    account(false, tag, payload.size());
  }
  return std::move(f.payload);
}

// ---------------------------------------------------------------------------
// In-process link

namespace {

struct InprocShared {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<Frame> queue[2];  // indexed by receiving role
  bool closed = false;
};

class InprocLink final : public Link {
 public:
  InprocLink(std::shared_ptr<InprocShared> shared, Role role)
      : shared_(std::move(shared)), role_(role) {}

  void write(const Frame& frame) override {
    std::lock_guard lock(shared_->mu);
    SECMOE_ENFORCE(!shared_->closed, ErrorCode::kChannelClosed,
                   "{} wrote to a closed channel", role_name(role_));
    shared_->queue[static_cast<int>(peer_of(role_))].push_back(frame);
    shared_->cv.notify_all();
  }

  Frame read() override {
    std::unique_lock lock(shared_->mu);
    auto& q = shared_->queue[static_cast<int>(role_)];
    shared_->cv.wait(lock, [&] { return !q.empty() || shared_->closed; });
    SECMOE_ENFORCE(!q.empty(), ErrorCode::kChannelClosed,
                   "{} read from a closed channel", role_name(role_));
    Frame f = std::move(q.front());
    q.pop_front();
    return f;
  }

  void close() override {
    std::lock_guard lock(shared_->mu);
    shared_->closed = true;
    shared_->cv.notify_all();
  }

 private:
  std::shared_ptr<InprocShared> shared_;
  Role role_;
};

// ---------------------------------------------------------------------------
// TCP link

bool write_all(int fd, const uint8_t* p, size_t n) {
  while (n > 0) {
    ssize_t w = ::send(fd, p, n, MSG_NOSIGNAL);
    if (w < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    p += w;
    n -= static_cast<size_t>(w);
  }
  return true;
}

bool read_all(int fd, uint8_t* p, size_t n) {
  while (n > 0) {
    ssize_t r = ::recv(fd, p, n, 0);
    if (r == 0) return false;
    if (r < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    p += r;
    n -= static_cast<size_t>(r);
  }
  return true;
}

// A background reader drains the socket into a queue so that a simultaneous
// exchange of large payloads cannot deadlock on full kernel buffers.
class TcpLink final : public Link {
 public:
  explicit TcpLink(int fd) : fd_(fd) {
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    reader_ = std::thread([this] { reader_loop(); });
  }

  ~TcpLink() override {
    close();
  }

  void write(const Frame& frame) override {
    uint8_t header[kFrameHeaderBytes];
    const uint64_t len = frame.payload.size();
    for (int i = 0; i < 8; ++i) header[i] = static_cast<uint8_t>(len >> (8 * i));
    header[8] = static_cast<uint8_t>(frame.tag);
    header[9] = static_cast<uint8_t>(frame.tag >> 8);
    std::lock_guard lock(write_mu_);
    SECMOE_ENFORCE(fd_ >= 0 && write_all(fd_, header, sizeof(header)) &&
                       write_all(fd_, frame.payload.data(), len),
                   ErrorCode::kChannelClosed, "tcp write failed: {}",
                   std::strerror(errno));
  }

  Frame read() override {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return !queue_.empty() || eof_; });
    SECMOE_ENFORCE(!queue_.empty(), ErrorCode::kChannelClosed,
                   "tcp peer closed the connection");
    Frame f = std::move(queue_.front());
    queue_.pop_front();
    return f;
  }

  void close() override {
    std::lock_guard guard(close_mu_);
    if (fd_ < 0) return;
    ::shutdown(fd_, SHUT_RDWR);
    if (reader_.joinable()) reader_.join();
    ::close(fd_);
    fd_ = -1;
  }

 private:
  void reader_loop() {
    for (;;) {
      uint8_t header[kFrameHeaderBytes];
      if (!read_all(fd_, header, sizeof(header))) break;
      uint64_t len = 0;
      for (int i = 0; i < 8; ++i) len |= uint64_t{header[i]} << (8 * i);
      Frame f;
      f.tag = static_cast<Tag>(header[8] | (header[9] << 8));
      f.payload.resize(len);
      if (!read_all(fd_, f.payload.data(), len)) break;
      std::lock_guard lock(mu_);
      queue_.push_back(std::move(f));
      cv_.notify_all();
    }
    std::lock_guard lock(mu_);
    eof_ = true;
    cv_.notify_all();
  }

  int fd_;
  std::mutex write_mu_;
  std::mutex close_mu_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Frame> queue_;
  bool eof_ = false;
  std::thread reader_;
};

sockaddr_in resolve(const std::string& host, uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) == 1) return addr;
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  SECMOE_ENFORCE(::getaddrinfo(host.c_str(), nullptr, &hints, &res) == 0 && res,
                 ErrorCode::kConnectionRefused, "cannot resolve host '{}'",
                 host);
  addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
  ::freeaddrinfo(res);
  return addr;
}

std::pair<std::string, uint16_t> split_addr(const std::string& addr) {
  auto colon = addr.rfind(':');
  SECMOE_ENFORCE(colon != std::string::npos, ErrorCode::kInvalidConfig,
                 "address '{}' is not host:port", addr);
  int port = std::stoi(addr.substr(colon + 1));
  SECMOE_ENFORCE(port >= 0 && port < 65536, ErrorCode::kInvalidConfig,
                 "bad port in '{}'", addr);
  return {addr.substr(0, colon), static_cast<uint16_t>(port)};
}

}  // namespace

std::pair<Endpoint, Endpoint> connect_inproc() {
  auto shared = std::make_shared<InprocShared>();
  return {Endpoint(Role::kClient,
                   std::make_unique<InprocLink>(shared, Role::kClient)),
          Endpoint(Role::kServer,
                   std::make_unique<InprocLink>(shared, Role::kServer))};
}

TcpAcceptor::TcpAcceptor(const std::string& host, uint16_t port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  SECMOE_ENFORCE(fd_ >= 0, ErrorCode::kIo, "socket(): {}", std::strerror(errno));
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr = resolve(host, port);
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
      ::listen(fd_, 1) != 0) {
    int err = errno;
    ::close(fd_);
    fd_ = -1;
    SECMOE_THROW(ErrorCode::kIo, "cannot listen on {}:{}: {}", host, port,
                 std::strerror(err));
  }
  socklen_t len = sizeof(addr);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpAcceptor::~TcpAcceptor() {
  if (fd_ >= 0) ::close(fd_);
}

Endpoint TcpAcceptor::accept(Role role, std::chrono::milliseconds timeout) {
  pollfd pfd{fd_, POLLIN, 0};
  int ready = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
  SECMOE_ENFORCE(ready > 0, ErrorCode::kTimeout,
                 "no peer connected to port {} within {} ms", port_,
                 timeout.count());
  int conn = ::accept(fd_, nullptr, nullptr);
  SECMOE_ENFORCE(conn >= 0, ErrorCode::kIo, "accept(): {}",
                 std::strerror(errno));
  return Endpoint(role, std::make_unique<TcpLink>(conn));
}

Endpoint tcp_connect(const std::string& host, uint16_t port, Role role,
                     std::chrono::milliseconds timeout, bool retry) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  sockaddr_in addr = resolve(host, port);
  for (;;) {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    SECMOE_ENFORCE(fd >= 0, ErrorCode::kIo, "socket(): {}",
                   std::strerror(errno));
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0) {
      return Endpoint(role, std::make_unique<TcpLink>(fd));
    }
    int err = errno;
    ::close(fd);
    if (!retry) {
      SECMOE_THROW(ErrorCode::kConnectionRefused, "connect to {}:{}: {}", host,
                   port, std::strerror(err));
    }
    if (std::chrono::steady_clock::now() >= deadline) {
      SECMOE_THROW(ErrorCode::kTimeout,
                   "peer {}:{} not reachable within {} ms (last error: {})",
                   host, port, timeout.count(), std::strerror(err));
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
}

Endpoint connect_tcp(const std::string& addr, Role role,
                     std::chrono::milliseconds timeout) {
  auto [host, port] = split_addr(addr);
  if (role == Role::kServer) {
    TcpAcceptor acceptor(host, port);
    return acceptor.accept(role, timeout);
  }
  return tcp_connect(host, port, role, timeout);
}

}  // namespace secmoe
