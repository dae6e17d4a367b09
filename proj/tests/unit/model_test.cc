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

#include <chrono>
#include <cmath>
#include <fstream>
#include <random>

#include "harness.h"
#include "secmoe/inference.h"
#include "secmoe/model.h"

namespace secmoe {
namespace {

namespace fs = std::filesystem;

FixedTensor random_tokens(const ModelConfig& c, uint32_t seed, double bound = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-bound, bound);
  std::vector<double> v(c.seq_len * c.d_model);
  for (auto& x : v) x = d(rng);
  return FixedTensor::from_reals({c.seq_len, c.d_model}, v, FixedConfig{});
}

fs::path temp_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("secmoe_model_test_" + name);
  fs::remove_all(p);
  return p;
}

template <class F>
ErrorCode error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kProtocol;
}

TEST(ModelConfig, NamedConfigs) {
  auto c = ModelConfig::named("toy-moe-8e");
  EXPECT_EQ(c.d_model, 64u);
  EXPECT_EQ(c.d_ff, 128u);
  EXPECT_EQ(c.num_heads, 4u);
  EXPECT_EQ(c.num_layers, 2u);
  EXPECT_EQ(c.n_experts, 8u);
  EXPECT_EQ(c.seq_len, 8u);
  EXPECT_EQ(ModelConfig::named("toy-moe-128e").n_experts, 128u);
  EXPECT_EQ(error_of([] { ModelConfig::named("toy-moe-0e"); }), ErrorCode::kInvalidConfig);
  EXPECT_EQ(error_of([] { ModelConfig::named("big-moe-8e"); }), ErrorCode::kInvalidConfig);
  EXPECT_EQ(error_of([] { ModelConfig::named("toy-moe-8"); }), ErrorCode::kInvalidConfig);
}

TEST(ModelConfig, Invariants) {
  ModelConfig c;
  c.num_heads = 5;
  EXPECT_EQ(error_of([&] { c.validate(); }), ErrorCode::kInvalidConfig);
  c = {};
  c.k_experts = 2;
  EXPECT_EQ(error_of([&] { c.validate(); }), ErrorCode::kUnsupportedK);
  c = {};
  c.n_experts = 0;
  EXPECT_EQ(error_of([&] { c.validate(); }), ErrorCode::kInvalidConfig);
}

TEST(Weights, DeterministicAndInRange) {
  auto c = ModelConfig::named("tiny-moe-4e");
  auto a = gen_weights(c, 7), b = gen_weights(c, 7), other = gen_weights(c, 8);
  EXPECT_TRUE(a == b);
  EXPECT_FALSE(a == other);
  for (const auto& [name, t] : a.tensors())
    for (double v : t->to_reals()) {
      ASSERT_GE(v, -0.1) << name;
      ASSERT_LE(v, 0.1) << name;
    }
}

TEST(Weights, SaveLoadRoundTrip) {
  auto c = ModelConfig::named("tiny-moe-4e");
  auto w = gen_weights(c, 3);
  auto dir = temp_dir("roundtrip");
  save_weights(w, dir);
  EXPECT_TRUE(load_weights(dir) == w);
  auto layout = load_manifest(dir);
  EXPECT_EQ(layout.config, c);
  EXPECT_EQ(layout.seed, 3u);
}

TEST(Weights, TruncatedBlobIsMalformed) {
  auto c = ModelConfig::named("tiny-moe-2e");
  auto dir = temp_dir("truncated");
  save_weights(gen_weights(c, 1), dir);
  fs::resize_file(dir / "layer0.gate.bin", 12);
  EXPECT_EQ(error_of([&] { load_weights(dir); }), ErrorCode::kMalformedFile);
  fs::resize_file(dir / "manifest.txt", 20);
  EXPECT_EQ(error_of([&] { load_weights(dir); }), ErrorCode::kMalformedFile);
}

TEST(Weights, EditedManifestDimsMismatch) {
  auto c = ModelConfig::named("tiny-moe-2e");
  auto dir = temp_dir("mismatch");
  save_weights(gen_weights(c, 1), dir);
  std::ifstream in(dir / "manifest.txt");
  std::string text((std::istreambuf_iterator<char>(in)), {});
  in.close();
  auto pos = text.find("tensor.layer0.gate=16x2");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 23, "tensor.layer0.gate=16x3");
  std::ofstream(dir / "manifest.txt") << text;
  EXPECT_EQ(error_of([&] { load_weights(dir); }), ErrorCode::kDimensionMismatch);
}

TEST(Tokens, ParseText) {
  auto rows = parse_token_text("1 2.5 -3\n\n  4e-1 5 6 # note\n");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_DOUBLE_EQ(rows[0][1], 2.5);
  EXPECT_DOUBLE_EQ(rows[1][0], 0.4);
  EXPECT_EQ(error_of([] { parse_token_text("1 x 2"); }), ErrorCode::kMalformedFile);
}

TEST(PlainForward, DeterministicAndCloseToShadow) {
  auto c = ModelConfig::named("toy-moe-4e");
  auto w = gen_weights(c, 5);
  auto x = random_tokens(c, 6);
  auto a = plain_forward(w, x), b = plain_forward(w, x);
  EXPECT_TRUE(a == b);
  auto shadow = shadow_forward(w, x.to_reals());
  auto fx = a.to_reals();
  double worst = 0;
  for (size_t i = 0; i < fx.size(); ++i) worst = std::max(worst, std::abs(fx[i] - shadow[i]));
  EXPECT_LT(worst, std::ldexp(1.0, -6));
}

TEST(PlainForward, SingleExpertIsDenseBlock) {
  // One expert: the block is LN(h1 + FFN(h1)) with h1 = LN(x + attn(x)).
  ModelConfig c = ModelConfig::named("tiny-moe-1e");
  auto w = gen_weights(c, 9);
  auto x = random_tokens(c, 10);
  const FixedConfig fx;
  PlainEvaluator ev(fx);
  PlainLinear lin(fx);
  const auto& L = w.layers[0];
  ArithShare in(x.raw(), fx.scale);
  auto a = attention(ev, lin, in, c.seq_len, c.num_heads, L.attn);
  auto h1 = layernorm(ev, ev.add(in, a), c.seq_len, c.d_model, L.ln1_gamma.raw(), L.ln1_beta.raw());
  auto f = expert_ffn(ev, lin, h1, c.seq_len, L.experts[0]);
  auto h2 = layernorm(ev, ev.add(h1, f), c.seq_len, c.d_model, L.ln2_gamma.raw(), L.ln2_beta.raw());
  EXPECT_EQ(plain_forward(w, x).raw(), h2.v);
}

TEST(PlainForward, ForcedGateUsesThatExpert) {
  // Constant h1 via gamma = 0, beta = b; the gate then scores expert j highest
  // for every token.
  ModelConfig c = ModelConfig::named("tiny-moe-4e");
  const FixedConfig fx;
  for (size_t j = 0; j < c.n_experts; ++j) {
    auto w = gen_weights(c, 11);
    auto& L = w.layers[0];
    std::fill(L.ln1_gamma.raw().begin(), L.ln1_gamma.raw().end(), 0);
    std::fill(L.ln1_beta.raw().begin(), L.ln1_beta.raw().end(), encode(0.1, fx));
    for (size_t r = 0; r < c.d_model; ++r)
      for (size_t e = 0; e < c.n_experts; ++e)
        L.gate.at(r, e) = encode(e == j ? 0.1 : -0.1, fx);
    auto x = random_tokens(c, 12);
    PlainEvaluator ev(fx);
    PlainLinear lin(fx);
    ArithShare h1(std::vector<uint64_t>(c.seq_len * c.d_model, encode(0.1, fx)), fx.scale);
    auto f = expert_ffn(ev, lin, h1, c.seq_len, L.experts[j]);
    auto h2 = layernorm(ev, ev.add(h1, f), c.seq_len, c.d_model, L.ln2_gamma.raw(), L.ln2_beta.raw());
    EXPECT_EQ(plain_forward(w, x).raw(), h2.v) << "expert " << j;
  }
}

TEST(SecureForward, MatchesPlainForward) {
  auto c = ModelConfig::named("toy-moe-8e");
  auto w = gen_weights(c, 1);
  auto x = random_tokens(c, 2);
  auto expect = plain_forward(w, x);
  const auto t0 = std::chrono::steady_clock::now();
  auto res = infer_inproc(w, x, {});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_EQ(res.output.raw(), expect.raw());
  EXPECT_GT(res.report.online.total_bytes(), 0u);
  EXPECT_GT(res.report.setup_bytes, 0u);
  ASSERT_EQ(res.report.trace.layers.size(), 2u);
  EXPECT_TRUE(res.report.trace.layers[0].moe_split.has_value());
  std::cout << "toy-moe-8e secure forward: " << secs << " s, online "
            << res.report.online.total_bytes() << " B\n";
}

TEST(SecureForward, DenseAgreesWithSparse) {
  auto c = ModelConfig::named("tiny-moe-4e");
  auto w = gen_weights(c, 21);
  auto x = random_tokens(c, 22);
  InferenceOptions o;
  auto sparse = infer_inproc(w, x, o);
  o.forward.protocol = MoeProtocol::kDense;
  auto dense = infer_inproc(w, x, o);
  EXPECT_EQ(sparse.output.raw(), dense.output.raw());
  EXPECT_NE(sparse.report.online.total_bytes(), dense.report.online.total_bytes());
}

}  // namespace
}  // namespace secmoe
