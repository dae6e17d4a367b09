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

#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "secmoe/common.h"

namespace secmoe {

struct NetProfile {
  std::string name;
  double bandwidth_bits_per_s = 0;
  double latency_s = 0;

  static NetProfile lan() { return {"lan", 1e9, 0.5e-3}; }
  static NetProfile wan() { return {"wan", 400e6, 4e-3}; }
  // Parses "lan" | "wan" | "none". "none" yields nullopt.
  static std::optional<NetProfile> parse(std::string_view name);
  void validate() const;
};

struct ChannelStats {
  uint64_t bytes_c_to_s = 0;
  uint64_t bytes_s_to_c = 0;
  // Length prefix and tag bytes, kept out of the payload counters.
  uint64_t frame_bytes_c_to_s = 0;
  uint64_t frame_bytes_s_to_c = 0;
  uint64_t messages_c_to_s = 0;
  uint64_t messages_s_to_c = 0;
  // Depth of the longest chain of causally dependent messages.
  uint64_t rounds = 0;

  uint64_t total_bytes() const { return bytes_c_to_s + bytes_s_to_c; }
  uint64_t total_frame_bytes() const {
    return frame_bytes_c_to_s + frame_bytes_s_to_c;
  }
  bool operator==(const ChannelStats&) const = default;
};

// Counter difference between two snapshots of the same session.
ChannelStats operator-(const ChannelStats& later, const ChannelStats& earlier);

// rounds * latency + 8 * payload_bytes / bandwidth.
double modeled_time(const ChannelStats& stats, const NetProfile& profile);

using Tag = uint16_t;

// Protocol step identifiers carried in every frame.
namespace tags {
inline constexpr Tag kShareInput = 1;
inline constexpr Tag kReveal = 2;
inline constexpr Tag kBeaverOpen = 3;
inline constexpr Tag kMatBeaverOpen = 4;
inline constexpr Tag kTruncOpen = 5;
inline constexpr Tag kMsbOpen = 6;
inline constexpr Tag kAndOpen = 7;
inline constexpr Tag kBitOpen = 8;
inline constexpr Tag kMuxOpen = 9;
inline constexpr Tag kHeSelection = 10;
inline constexpr Tag kHeInput = 11;
inline constexpr Tag kHeResponse = 12;
inline constexpr Tag kServerInput = 13;
inline constexpr Tag kTest = 100;
}  // namespace tags

inline constexpr size_t kFrameHeaderBytes = 10;  // u64 length + u16 tag

struct Frame {
  Tag tag = 0;
  std::vector<uint8_t> payload;
};

struct TranscriptEntry {
  Tag tag;
  bool client_to_server;
  uint64_t length;
  bool operator==(const TranscriptEntry&) const = default;
};

// Byte-level duplex link between the two parties.
class Link {
 public:
  virtual ~Link() = default;
  virtual void write(const Frame& frame) = 0;
  virtual Frame read() = 0;
  virtual void close() = 0;
};

// One party's end of the channel. Not thread-safe: an endpoint belongs to one
// execution context at a time.
//
// Both endpoints keep the full counters for both directions, so the two views
// agree without any extra traffic. Rounds are tracked with a pair of logical
// clocks (one per party) that both endpoints advance identically, given that
// both parties issue their send/recv/exchange calls in the same program order.
class Endpoint {
 public:
  Endpoint(Role role, std::unique_ptr<Link> link);
  ~Endpoint();
  Endpoint(Endpoint&&) noexcept;
  Endpoint& operator=(Endpoint&&) noexcept;

  Role role() const { return role_; }

  void send(Tag tag, std::span<const uint8_t> payload);
  std::vector<uint8_t> recv(Tag tag);
  // Simultaneous send and receive; counts as a single round.
  std::vector<uint8_t> exchange(Tag tag, std::span<const uint8_t> payload);

  const ChannelStats& stats() const { return stats_; }
  void set_record_transcript(bool on) { record_ = on; }
  const std::vector<TranscriptEntry>& transcript() const { return transcript_; }

  void close();

 private:
  void account(bool client_to_server, Tag tag, size_t len);

  Role role_;
  std::unique_ptr<Link> link_;
  ChannelStats stats_;
  uint64_t clock_self_ = 0;
  uint64_t clock_peer_ = 0;
  bool record_ = false;
  std::vector<TranscriptEntry> transcript_;
};

// Two linked in-process endpoints (client, server).
std::pair<Endpoint, Endpoint> connect_inproc();

// Listening socket for the server party. Port 0 picks a free port.
class TcpAcceptor {
 public:
  TcpAcceptor(const std::string& host, uint16_t port);
  ~TcpAcceptor();
  TcpAcceptor(const TcpAcceptor&) = delete;
  TcpAcceptor& operator=(const TcpAcceptor&) = delete;

  uint16_t port() const { return port_; }
  Endpoint accept(Role role, std::chrono::milliseconds timeout);

 private:
  int fd_ = -1;
  uint16_t port_ = 0;
};

// Client side: retries until the peer accepts or the timeout elapses
// (kTimeout). With retry disabled a refused connection throws
// kConnectionRefused immediately.
Endpoint tcp_connect(const std::string& host, uint16_t port, Role role,
                     std::chrono::milliseconds timeout, bool retry = true);

// "host:port". The server role listens, the client role connects.
Endpoint connect_tcp(const std::string& addr, Role role,
                     std::chrono::milliseconds timeout);

}  // namespace secmoe
