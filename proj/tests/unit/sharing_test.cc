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


#include <condition_variable>
#include <deque>
#include <mutex>
#include <random>
#include <thread>

#include <gtest/gtest.h>

#include "harness.h"
#include "secmoe/dealer.h"
#include "secmoe/party.h"
#include "secmoe/sharing.h"

namespace secmoe {
namespace {

using testing::client_input;
using testing::run_revealed;
using testing::session_config;
using testing::thrown_code;

// In-process link that also keeps a copy of every payload written.
struct TapShared {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<Frame> queue[2];
  std::vector<Frame> written;
};

class TapLink final : public Link {
 public:
  TapLink(std::shared_ptr<TapShared> sh, Role role) : sh_(std::move(sh)), role_(role) {}
  void write(const Frame& f) override {
    std::lock_guard lock(sh_->mu);
    sh_->queue[static_cast<int>(peer_of(role_))].push_back(f);
    sh_->written.push_back(f);
    sh_->cv.notify_all();
  }
  Frame read() override {
    std::unique_lock lock(sh_->mu);
    auto& q = sh_->queue[static_cast<int>(role_)];
    sh_->cv.wait(lock, [&] { return !q.empty(); });
    Frame f = std::move(q.front());
    q.pop_front();
    return f;
  }
  void close() override {}

 private:
  std::shared_ptr<TapShared> sh_;
  Role role_;
};

// Runs fn for both roles on hand-dealt pools; returns every frame written.
std::vector<Frame> tapped_session(const Budget& budget, uint64_t seed,
                                  const std::function<void(Party&)>& fn) {
  auto sh = std::make_shared<TapShared>();
  Endpoint ec(Role::kClient, std::make_unique<TapLink>(sh, Role::kClient));
  Endpoint es(Role::kServer, std::make_unique<TapLink>(sh, Role::kServer));
  auto [pc, ps] = Dealer::deal(budget, seed, 64);
  Party client(Role::kClient, ec, std::move(pc), FixedConfig{}, seed);
  Party server(Role::kServer, es, std::move(ps), FixedConfig{}, seed + 1);
  std::thread t([&] { fn(server); });
  fn(client);
  t.join();
  return sh->written;
}

// Pearson statistic of byte frequencies against uniform.
double chi_square_bytes(const std::vector<uint8_t>& data) {
  std::array<double, 256> counts{};
  for (uint8_t b : data) counts[b] += 1;
  const double expected = static_cast<double>(data.size()) / 256.0;
  double stat = 0;
  for (double c : counts) stat += (c - expected) * (c - expected) / expected;
  return stat;
}

// Upper 1% point of chi-square with 255 degrees of freedom.
constexpr double kChiSquare255At01 = 310.457;

// Per-party delta of the channel stats around fn, revealed alongside the
// result so both parties agree.
ChannelStats stats_around(Party& p, const std::function<void()>& fn) {
  const auto before = p.ep().stats();
  fn();
  return p.ep().stats() - before;
}

TEST(Sharing, ShareRevealRoundTrip) {
  for (int ell : {12, 32, 64}) {
    std::mt19937_64 rng(ell);
    std::vector<uint64_t> x(500);
    for (auto& v : x) v = rng() & ring_mask(ell);
    EXPECT_EQ(run_revealed(session_config(ell, 4), [&](Party& p) {
                return reveal(p, client_input(p, x, 0));
              }),
              x);
  }
}

TEST(Sharing, PackRingUsesCeilBytes) {
  const std::vector<uint64_t> v = {0x123, 0xfff, 0};
  auto packed = pack_ring(v, 12);
  EXPECT_EQ(packed.size(), 6u);
  EXPECT_EQ(unpack_ring(packed, 3, 12), v);
  EXPECT_EQ(pack_ring(v, 64).size(), 24u);
}

TEST(Sharing, MulRingCostsTwoRingElementsEachWay) {
  const size_t n = 333;
  ChannelStats st;
  run_revealed(session_config(), [&](Party& p) {
    std::vector<uint64_t> x(n, 5);
    auto a = client_input(p, x, 0);
    ArithShare out;
    const auto d = stats_around(p, [&] { out = mul_ring(p, a, a); });
    if (p.is_client()) st = d;
    return reveal(p, out);
  });
  EXPECT_EQ(st.bytes_c_to_s, 2 * 8 * n);
  EXPECT_EQ(st.bytes_s_to_c, 2 * 8 * n);
  EXPECT_EQ(st.rounds, 1u);
}

TEST(Sharing, MuxCostsOneRingElementPlusSelectorBits) {
  const size_t n = 333;
  ChannelStats st;
  run_revealed(session_config(), [&](Party& p) {
    std::vector<uint64_t> x(n, 5);
    auto a = client_input(p, x, 0);
    BitVec sel(n);
    for (size_t i = 0; i < n; i += 3) sel.set(i, true);
    auto s = share_bits(p, Role::kClient, p.is_client() ? &sel : nullptr, n);
    ArithShare out;
    const auto d = stats_around(p, [&] { out = mux(p, s, a); });
    if (p.is_client()) st = d;
    return reveal(p, out);
  });
  EXPECT_EQ(st.bytes_c_to_s, 8 * n + (n + 7) / 8);
  EXPECT_EQ(st.bytes_s_to_c, 8 * n + (n + 7) / 8);
  EXPECT_EQ(st.rounds, 1u);
}

TEST(Sharing, PoolNeverReusesCorrelations) {
  const size_t n = 64;
  Budget b;
  b.triples = n;
  std::optional<ErrorCode> second[2];
  tapped_session(b, 3, [&](Party& p) {
    ArithShare x(std::vector<uint64_t>(n, p.is_client() ? 7 : 0), 0);
    mul_ring(p, x, x);
    second[p.is_client() ? 0 : 1] = thrown_code([&] { mul_ring(p, x, x); });
  });
  EXPECT_EQ(second[0], ErrorCode::kRandomnessExhausted);
  EXPECT_EQ(second[1], ErrorCode::kRandomnessExhausted);
}

TEST(Sharing, OpenedValuesLookUniform) {
  // Constant inputs: any leak of structure would skew the byte histogram.
  // Each session is one chi-square test at the 1% level; over 20 sessions
  // three or more rejections happen by chance with probability about 0.1%.
  const size_t n = 2048, sessions = 20;
  Budget b;
  b.triples = n;
  b.mux_corrs = n;
  size_t rejected[2] = {0, 0};
  double mean[2] = {0, 0};
  for (uint64_t seed = 1; seed <= sessions; ++seed) {
    const auto frames = tapped_session(b, seed, [&](Party& p) {
      const bool c = p.is_client();
      ArithShare x(std::vector<uint64_t>(n, c ? 1 : 0), 0);
      BitVec sel(n);
      if (c)
        for (size_t i = 0; i < n; ++i) sel.set(i, true);
      mul_ring(p, x, x);
      mux(p, sel, x);
    });
    std::vector<uint8_t> opened[2];
    for (const auto& f : frames) {
      const int which = f.tag == tags::kBeaverOpen ? 0 : f.tag == tags::kMuxOpen ? 1 : -1;
      if (which >= 0) opened[which].insert(opened[which].end(), f.payload.begin(), f.payload.end());
    }
    ASSERT_EQ(opened[0].size(), 2 * 2 * 8 * n);
    ASSERT_EQ(opened[1].size(), 2 * (8 * n + n / 8));
    for (int w = 0; w < 2; ++w) {
      const double stat = chi_square_bytes(opened[w]);
      rejected[w] += stat >= kChiSquare255At01;
      mean[w] += stat / sessions;
    }
  }
  for (int w = 0; w < 2; ++w) {
    EXPECT_LE(rejected[w], 2u) << (w ? "mux" : "mul");
    // 255 degrees of freedom: sd of the mean over 20 sessions is about 5.
    EXPECT_NEAR(mean[w], 255.0, 25.0) << (w ? "mux" : "mul");
  }
}

TEST(Sharing, ChiSquareDetectsUnmaskedData) {
  std::vector<uint8_t> skewed(100000);
  for (size_t i = 0; i < skewed.size(); ++i) skewed[i] = (i % 8 == 0) ? 1 : 0;
  EXPECT_GT(chi_square_bytes(skewed), kChiSquare255At01);
}

TEST(Sharing, SizeMismatchIsRejected) {
  EXPECT_ANY_THROW(run_revealed(session_config(), [&](Party& p) {
    auto a = client_input(p, std::vector<uint64_t>(3, 1), 0);
    auto b = client_input(p, std::vector<uint64_t>(4, 1), 0);
    return reveal(p, mul_ring(p, a, b));
  }));
}

}  // namespace
}  // namespace secmoe
