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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "harness.h"
#include "secmoe/protocols/nonlinear.h"

namespace secmoe {
namespace {

using testing::encode_all;
using testing::eval_plain;
using testing::eval_secure;

const FixedConfig kCfg{64, 18};

std::vector<double> uniform(size_t n, double lo, double hi, uint32_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

std::vector<double> decode_all(const std::vector<uint64_t>& v, int frac) {
  std::vector<double> out;
  for (auto e : v) out.push_back(decode(e, FixedConfig{64, frac}));
  return out;
}

// Secure and plaintext evaluation reconstruct to the same ring values.
void expect_secure_matches_plain(const std::vector<double>& xs,
                                 const testing::EvalFn& fn) {
  auto x = encode_all(xs, kCfg);
  auto plain = eval_plain(kCfg, x, kCfg.scale, fn);
  auto secure = eval_secure(testing::session_config(), x, kCfg.scale, fn);
  ASSERT_EQ(plain.size(), secure.size());
  for (size_t i = 0; i < plain.size(); ++i)
    ASSERT_EQ(plain[i], secure[i]) << "at index " << i << " x=" << xs[i % xs.size()];
}

TEST(GeluSpec, BreakpointValues) {
  // Reference values at the segment boundaries, evaluated on the left piece.
  EXPECT_NEAR(gelu_plain(-1.0), -0.16755998, 1e-8);
  EXPECT_NEAR(gelu_plain(3.0), 2.99684701, 1e-8);
  EXPECT_DOUBLE_EQ(gelu_plain(-7.0), 0.0);
  EXPECT_DOUBLE_EQ(gelu_plain(4.5), 4.5);
  EXPECT_EQ(gelu_spec().nonzero_count(), 13u);
}

TEST(GeluSpec, HalfOpenIntervals) {
  const auto spec = gelu_spec();
  EXPECT_EQ(spec.segment_of(-5.0), 0u);
  EXPECT_EQ(spec.segment_of(-4.999), 1u);
  EXPECT_EQ(spec.segment_of(3.0), 4u);
  EXPECT_EQ(spec.segment_of(3.0001), 5u);
}

TEST(Gelu, SecureMatchesPlain) {
  auto xs = uniform(200, -7.0, 5.0, 11);
  for (double b : {-5.0, -3.0, -1.0, 1.0, 3.0}) {
    xs.push_back(b);
    xs.push_back(b + kCfg.ulp());
    xs.push_back(b - kCfg.ulp());
  }
  expect_secure_matches_plain(
      xs, [](Evaluator& ev, const ArithShare& x) { return gelu(ev, x); });
}

TEST(Gelu, FixedPointTracksRealFit) {
  auto xs = uniform(2000, -6.0, 4.0, 12);
  auto x = encode_all(xs, kCfg);
  auto y = decode_all(eval_plain(kCfg, x, kCfg.scale,
                                 [](Evaluator& ev, const ArithShare& a) {
                                   return gelu(ev, a);
                                 }),
                      kCfg.scale);
  for (size_t i = 0; i < xs.size(); ++i) {
    const double xr = decode(x[i], kCfg);
    EXPECT_NEAR(y[i], gelu_plain(xr), 8 * kCfg.ulp()) << "x=" << xr;
  }
}

TEST(Gelu, NaiveBaselineAgrees) {
  auto xs = uniform(300, -6.0, 4.0, 13);
  auto x = encode_all(xs, kCfg);
  auto fast = eval_plain(kCfg, x, kCfg.scale, [](Evaluator& ev, const ArithShare& a) {
    return gelu(ev, a);
  });
  auto naive = eval_plain(kCfg, x, kCfg.scale, [](Evaluator& ev, const ArithShare& a) {
    return naive_piecewise_gelu(ev, a);
  });
  for (size_t i = 0; i < xs.size(); ++i)
    EXPECT_LE(std::abs(to_signed(fast[i] - naive[i], 64)), 8) << "x=" << xs[i];
  expect_secure_matches_plain(xs, [](Evaluator& ev, const ArithShare& a) {
    return naive_piecewise_gelu(ev, a);
  });
}

TEST(Gelu, MuxCountEqualsNonzeroCoefficients) {
  OpCounters c;
  std::vector<uint64_t> x = encode_all({0.5, -2.0, 7.0}, kCfg);
  eval_plain(kCfg, x, kCfg.scale,
             [](Evaluator& ev, const ArithShare& a) { return gelu(ev, a); }, &c);
  EXPECT_EQ(c.mux_public, gelu_spec().nonzero_count() * x.size());
  EXPECT_EQ(c.mux, 0u);
}

TEST(Exp, SecureMatchesPlain) {
  auto xs = uniform(200, -16.0, 0.0, 21);
  xs.push_back(-13.0);
  xs.push_back(0.0);
  expect_secure_matches_plain(
      xs, [](Evaluator& ev, const ArithShare& x) { return exp_neg(ev, x); });
}

TEST(Exp, ClipsBelowThreshold) {
  auto x = encode_all({-13.5, -20.0, -8.0}, kCfg);
  auto y = eval_plain(kCfg, x, kCfg.scale,
                      [](Evaluator& ev, const ArithShare& a) { return exp_neg(ev, a); });
  EXPECT_EQ(y[0], 0u);
  EXPECT_EQ(y[1], 0u);
  EXPECT_NE(y[2], 0u);
}

TEST(Exp, CloseToExpNearZero) {
  auto xs = uniform(500, -2.0, 0.0, 22);
  auto y = decode_all(eval_plain(kCfg, encode_all(xs, kCfg), kCfg.scale,
                                 [](Evaluator& ev, const ArithShare& a) {
                                   return exp_neg(ev, a);
                                 }),
                      kCfg.scale);
  for (size_t i = 0; i < xs.size(); ++i)
    EXPECT_NEAR(y[i], std::exp(xs[i]), 2e-2) << xs[i];
}

TEST(Reciprocal, AccurateAndSecureMatchesPlain) {
  auto xs = uniform(300, 1.0, 64.0, 31);
  auto fn = [](Evaluator& ev, const ArithShare& a) { return reciprocal(ev, a, 1, 8); };
  auto y = decode_all(eval_plain(kCfg, encode_all(xs, kCfg), kCfg.scale, fn), kCfg.scale);
  for (size_t i = 0; i < xs.size(); ++i)
    EXPECT_NEAR(y[i] * xs[i], 1.0, 2e-3) << xs[i];
  expect_secure_matches_plain(xs, fn);
}

TEST(Rsqrt, AccurateAndSecureMatchesPlain) {
  auto xs = uniform(300, 0.01, 100.0, 32);
  auto fn = [](Evaluator& ev, const ArithShare& a) { return rsqrt(ev, a, -11, 16); };
  auto y = decode_all(eval_plain(kCfg, encode_all(xs, kCfg), kCfg.scale, fn), kCfg.scale);
  for (size_t i = 0; i < xs.size(); ++i)
    EXPECT_NEAR(y[i] * std::sqrt(xs[i]), 1.0, 5e-3) << xs[i];
  expect_secure_matches_plain(xs, fn);
}

TEST(Softmax, RowsSumToOneAndSecureMatchesPlain) {
  const size_t rows = 6, cols = 8;
  auto xs = uniform(rows * cols, -4.0, 4.0, 41);
  auto fn = [&](Evaluator& ev, const ArithShare& a) { return softmax(ev, a, rows, cols); };
  auto y = decode_all(eval_plain(kCfg, encode_all(xs, kCfg), kCfg.scale, fn), kCfg.scale);
  for (size_t r = 0; r < rows; ++r) {
    double mx = -1e9, denom = 0, sum = 0;
    for (size_t c = 0; c < cols; ++c) mx = std::max(mx, xs[r * cols + c]);
    for (size_t c = 0; c < cols; ++c) denom += std::exp(xs[r * cols + c] - mx);
    for (size_t c = 0; c < cols; ++c) {
      sum += y[r * cols + c];
      EXPECT_NEAR(y[r * cols + c], std::exp(xs[r * cols + c] - mx) / denom, 2e-2);
    }
    EXPECT_NEAR(sum, 1.0, 2e-2);
  }
  expect_secure_matches_plain(xs, fn);
}

TEST(LayerNorm, NormalizesAndSecureMatchesPlain) {
  const size_t rows = 4, cols = 16;
  auto xs = uniform(rows * cols, -3.0, 3.0, 51);
  std::vector<uint64_t> gamma(cols, encode(1.0, kCfg)), beta(cols, 0);
  auto fn = [&](Evaluator& ev, const ArithShare& a) {
    return layernorm(ev, a, rows, cols, gamma, beta);
  };
  auto y = decode_all(eval_plain(kCfg, encode_all(xs, kCfg), kCfg.scale, fn), kCfg.scale);
  for (size_t r = 0; r < rows; ++r) {
    double mean = 0, var = 0;
    for (size_t c = 0; c < cols; ++c) mean += xs[r * cols + c] / cols;
    for (size_t c = 0; c < cols; ++c) var += std::pow(xs[r * cols + c] - mean, 2) / cols;
    for (size_t c = 0; c < cols; ++c) {
      const double ref = (xs[r * cols + c] - mean) / std::sqrt(var + kLayerNormEpsilon);
      EXPECT_NEAR(y[r * cols + c], ref, 2e-2);
    }
  }
  expect_secure_matches_plain(xs, fn);
}

TEST(Topk, OneHotAndMaxWithLowestIndexTies) {
  const size_t rows = 5, cols = 6;
  std::vector<double> xs = {1, 2, 3, 3, 0, -1,  //
                            5, 5, 5, 5, 5, 5,   //
                            -2, -3, -1, -4, -9, -1,
                            0, 0, 0, 0, 0, 0.5,
                            7, -7, 6.9, 0, 0, 0};
  auto x = encode_all(xs, kCfg);
  const size_t expected[rows] = {2, 0, 2, 5, 0};
  for (bool secure : {false, true}) {
    std::vector<uint64_t> onehot, mx;
    auto body = [&](Evaluator& ev, Role role) {
      auto in = testing::client_input(ev, role, x, kCfg.scale);
      auto res = topk(ev, in, rows, cols);
      mx = ev.reveal(res.max);
      onehot = ev.reveal(ev.b2a(res.onehot));
    };
    if (secure) {
      testing::run_revealed(testing::session_config(), [&](Party& p) {
        SecureEvaluator ev(p);
        body(ev, p.role());
        return std::vector<uint64_t>{};
      });
    } else {
      PlainEvaluator ev(kCfg);
      body(ev, Role::kClient);
    }
    for (size_t r = 0; r < rows; ++r) {
      EXPECT_EQ(mx[r], x[r * cols + expected[r]]) << "row " << r;
      for (size_t c = 0; c < cols; ++c)
        EXPECT_EQ(onehot[r * cols + c], c == expected[r] ? 1u : 0u)
            << "secure=" << secure << " row " << r << " col " << c;
    }
  }
}

TEST(Topk, RejectsLargerK) {
  PlainEvaluator ev(kCfg);
  ArithShare s(std::vector<uint64_t>(8, 0), kCfg.scale);
  try {
    topk(ev, s, 2, 4, 2);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnsupportedK);
  }
}

}  // namespace
}  // namespace secmoe
