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


#include <thread>

#include <gtest/gtest.h>

#include "harness.h"
#include "secmoe/session.h"
#include "secmoe/sharing.h"
#include "secmoe/transport.h"

namespace secmoe {
namespace {

using namespace std::chrono_literals;
using testing::thrown_code;

std::vector<uint8_t> bytes(size_t n, uint8_t fill = 0xab) {
  return std::vector<uint8_t>(n, fill);
}

// send 100 / reply 50 / exchange 7 both ways.
void ping_pong(Endpoint& ep) {
  if (ep.role() == Role::kClient) {
    ep.send(tags::kTest, bytes(100));
    EXPECT_EQ(ep.recv(tags::kTest).size(), 50u);
  } else {
    EXPECT_EQ(ep.recv(tags::kTest).size(), 100u);
    ep.send(tags::kTest, bytes(50));
  }
  EXPECT_EQ(ep.exchange(tags::kTest, bytes(7)).size(), 7u);
}

void run_pair(Endpoint& c, Endpoint& s, const std::function<void(Endpoint&)>& fn) {
  std::thread t([&] { fn(s); });
  fn(c);
  t.join();
}

std::pair<Endpoint, Endpoint> tcp_pair() {
  TcpAcceptor acc("127.0.0.1", 0);
  Endpoint server(Role::kServer, nullptr);
  std::thread t([&] { server = acc.accept(Role::kServer, 10s); });
  Endpoint client = tcp_connect("127.0.0.1", acc.port(), Role::kClient, 10s);
  t.join();
  return {std::move(client), std::move(server)};
}

TEST(NetProfile, ModeledTime) {
  ChannelStats s;
  s.rounds = 2;
  s.bytes_c_to_s = 100'000'000;
  s.bytes_s_to_c = 25'000'000;
  EXPECT_DOUBLE_EQ(modeled_time(s, NetProfile::lan()), 1.001);
  EXPECT_DOUBLE_EQ(modeled_time(ChannelStats{}, NetProfile::lan()), 0.0);
  EXPECT_GT(modeled_time(s, NetProfile::wan()), modeled_time(s, NetProfile::lan()));
}

TEST(NetProfile, Parse) {
  EXPECT_EQ(NetProfile::parse("wan")->name, "wan");
  EXPECT_FALSE(NetProfile::parse("none").has_value());
  EXPECT_EQ(thrown_code([] { NetProfile::parse("dialup"); }), ErrorCode::kInvalidConfig);
  EXPECT_EQ(thrown_code([] { NetProfile{"x", 0, 0}.validate(); }), ErrorCode::kInvalidConfig);
}

TEST(Inproc, CountsPayloadFramesAndRounds) {
  auto [c, s] = connect_inproc();
  run_pair(c, s, ping_pong);
  for (const Endpoint* ep : {&c, &s}) {
    const auto& st = ep->stats();
    EXPECT_EQ(st.bytes_c_to_s, 107u);
    EXPECT_EQ(st.bytes_s_to_c, 57u);
    EXPECT_EQ(st.messages_c_to_s, 2u);
    EXPECT_EQ(st.messages_s_to_c, 2u);
    EXPECT_EQ(st.frame_bytes_c_to_s, 2 * kFrameHeaderBytes);
    EXPECT_EQ(st.rounds, 3u);
  }
}

TEST(Inproc, EmptyPayloadIsCountedAsMessageOnly) {
  auto [c, s] = connect_inproc();
  c.send(tags::kTest, {});
  EXPECT_TRUE(s.recv(tags::kTest).empty());
  EXPECT_EQ(s.stats().bytes_c_to_s, 0u);
  EXPECT_EQ(s.stats().messages_c_to_s, 1u);
  EXPECT_EQ(s.stats().rounds, 1u);
}

TEST(Inproc, TagMismatchAndClosedChannel) {
  auto [c, s] = connect_inproc();
  c.send(tags::kTest, bytes(1));
  EXPECT_EQ(thrown_code([&] { s.recv(tags::kReveal); }), ErrorCode::kProtocol);
  c.close();
  EXPECT_EQ(thrown_code([&] { s.recv(tags::kTest); }), ErrorCode::kChannelClosed);
  EXPECT_EQ(thrown_code([&] { c.send(tags::kTest, bytes(1)); }), ErrorCode::kChannelClosed);
}

TEST(Tcp, SameCountsAsInproc) {
  auto [ic, is] = connect_inproc();
  auto [tc, ts] = tcp_pair();
  for (auto* ep : {&ic, &is, &tc, &ts}) ep->set_record_transcript(true);
  run_pair(ic, is, ping_pong);
  run_pair(tc, ts, ping_pong);
  EXPECT_EQ(tc.stats(), ic.stats());
  EXPECT_EQ(ts.stats(), is.stats());
  EXPECT_EQ(tc.transcript(), ic.transcript());
  EXPECT_EQ(ts.transcript(), is.transcript());
}

TEST(Tcp, ProtocolTranscriptMatchesInproc) {
  const auto sc = testing::session_config(64, 18, 3);
  const std::vector<uint64_t> x = {1, 2, 3, 4, 5};
  auto body = [&](Party& p) {
    auto a = testing::client_input(p, x, 18);
    auto b = share_input(p, Role::kServer, p.is_client() ? nullptr : &x, x.size(), 18);
    reveal(p, mul_fixed(p, a, b));
    reveal_bits(p, msb(p, a));
  };
  auto run = [&](Endpoint& c, Endpoint& s) {
    c.set_record_transcript(true);
    s.set_record_transcript(true);
    TcpOutcome out[2];
    std::thread t([&] { out[1] = run_party(sc, Role::kServer, s, body); });
    out[0] = run_party(sc, Role::kClient, c, body);
    t.join();
    EXPECT_EQ(out[0].self.stats, out[1].self.stats);
    return out[0].self.stats;
  };
  auto [ic, is] = connect_inproc();
  auto [tc, ts] = tcp_pair();
  EXPECT_EQ(run(ic, is), run(tc, ts));
  EXPECT_EQ(ic.transcript(), tc.transcript());
  EXPECT_FALSE(ic.transcript().empty());
}

TEST(Tcp, RefusedAndTimeout) {
  uint16_t port;
  {
    TcpAcceptor acc("127.0.0.1", 0);
    port = acc.port();
  }
  EXPECT_EQ(thrown_code([&] { tcp_connect("127.0.0.1", port, Role::kClient, 1s, false); }),
            ErrorCode::kConnectionRefused);
  EXPECT_EQ(thrown_code([&] { tcp_connect("127.0.0.1", port, Role::kClient, 200ms); }),
            ErrorCode::kTimeout);
  TcpAcceptor acc("127.0.0.1", 0);
  EXPECT_EQ(thrown_code([&] { acc.accept(Role::kServer, 100ms); }), ErrorCode::kTimeout);
  EXPECT_EQ(thrown_code([] { connect_tcp("localhost", Role::kClient, 1s); }),
            ErrorCode::kInvalidConfig);
}

TEST(Tcp, PeerCloseSurfacesAsChannelClosed) {
  auto [c, s] = tcp_pair();
  c.close();
  EXPECT_EQ(thrown_code([&] { s.recv(tags::kTest); }), ErrorCode::kChannelClosed);
}

}  // namespace
}  // namespace secmoe
