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

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "secmoe/evaluator.h"
#include "secmoe/he.h"
#include "secmoe/he_matmul.h"
#include "secmoe/protocols/nonlinear.h"
#include "secmoe/ring.h"

namespace secmoe {

// One expert's GeGLU feed-forward weights: W1, V are d_model x d_ff and W2 is
// d_ff x d_model.
struct ExpertWeights {
  FixedTensor w1, v, w2;
};

// Products of an activation (k x m, at scale s) with server-held weight
// matrices. Results are raw ring products at frac 2s, not yet truncated.
// On the client the weight tensors only supply their shapes.
class Linear {
 public:
  virtual ~Linear() = default;
  // With reuse_input set, the last activation projected with the same
  // shapes is reused; the caller guarantees it holds the same value.
  virtual std::vector<ArithShare> project(
      const ArithShare& x, size_t k, size_t m,
      std::span<const FixedTensor* const> weights, bool reuse_input = false) = 0;

  ArithShare project(const ArithShare& x, size_t k, size_t m,
                     const FixedTensor& w) {
    const FixedTensor* ws[1] = {&w};
    return std::move(project(x, k, m, ws)[0]);
  }
};

class PlainLinear final : public Linear {
 public:
  explicit PlainLinear(FixedConfig cfg) : cfg_(cfg) {}
  using Linear::project;
  std::vector<ArithShare> project(const ArithShare& x, size_t k, size_t m,
                                  std::span<const FixedTensor* const> weights,
                                  bool reuse_input = false) override;

 private:
  FixedConfig cfg_;
};

// The client encrypts its share of the activation; the server adds its own
// share under encryption, multiplies by the encoded weights, masks every
// coefficient with fresh uniform randomness and returns the result. The
// server keeps the mask as its share.
class HeLinear final : public Linear {
 public:
  explicit HeLinear(Party& party) : p_(party) {}
  using Linear::project;
  std::vector<ArithShare> project(const ArithShare& x, size_t k, size_t m,
                                  std::span<const FixedTensor* const> weights,
                                  bool reuse_input = false) override;

 private:
  Party& p_;
  // The most recent encrypted activation per (k, m, n) shape. Ciphertexts are
  // kept on the server; the client only records that one exists.
  std::map<std::array<size_t, 3>, std::vector<he::Ciphertext>> cache_;
};

// Ciphertext batches on the wire.
void send_ciphertexts(Party& p, Tag tag, std::span<const he::Ciphertext> cts);
std::vector<he::Ciphertext> recv_ciphertexts(Party& p, Tag tag, size_t count);
// The client's encryption of a polynomial; a zero ciphertext of the same size
// in dry runs.
he::Ciphertext client_encrypt(Party& p, const he::Plaintext& pt);
// Uniform polynomial over the plaintext ring from the party's generator.
he::Plaintext uniform_plaintext(Party& p);

// GeGLU expert: W2 (gelu(x W1) * (x V)), all products rescaled to scale s.
ArithShare expert_ffn(Evaluator& ev, Linear& lin, const ArithShare& x,
                      size_t tokens, const ExpertWeights& expert,
                      bool reuse_input = false);

struct AttentionWeights {
  FixedTensor wq, wk, wv, wo;  // d_model x d_model
};

// Multi-head self-attention over a tokens x d_model activation, including the
// output projection.
ArithShare attention(Evaluator& ev, Linear& lin, const ArithShare& x,
                     size_t tokens, size_t heads,
                     const AttentionWeights& weights);

// Top-1 one-hot routing decision as 0/1 ring values (frac 0), tokens x E.
struct Routing {
  BitVec onehot;
  ArithShare indicator;
};
Routing route_top1(Evaluator& ev, const ArithShare& scores, size_t tokens,
                   size_t n_experts);

struct MoeOptions {
  // Multiply the expert output by the softmax weight of the selected gate.
  bool gate_scaling = false;
};

// Phase split of a secure sparse MoE call, for cost reporting.
struct MoePhaseStats {
  ChannelStats selection;
  ChannelStats compute;
};

// Encrypted weights of one token's selected expert, block-indexed as
// MatmulPlan::encode_weights for the plans choose(1, m, n) (w1, v) and
// choose(1, n, m) (w2).
struct SelectedExpert {
  std::vector<he::Ciphertext> w1, v, w2;
};

// Selection phase. The client encrypts its share of the 0/1 routing
// indicator (tokens x E), the server adds its own share under encryption and
// forms each token's selected weights with coefficient-times-plaintext
// products, without learning the choice. Returns one entry per token on the
// server and nothing on the client. Requires the semantic engine.
std::vector<SelectedExpert> select_experts(
    Party& p, const ArithShare& indicator, size_t tokens,
    std::span<const ExpertWeights> experts);

// Select-then-compute sparse MoE. Each token's routing one-hot is converted
// to arithmetic shares and sent encrypted; the server forms the encrypted
// weights of the selected expert locally, then a single expert is evaluated
// with ciphertext-ciphertext products. Requires the semantic engine.
ArithShare secure_sparse_moe(Party& p, const ArithShare& x, size_t tokens,
                             const ArithShare& scores,
                             std::span<const ExpertWeights> experts,
                             const MoeOptions& opts = {},
                             MoePhaseStats* phases = nullptr);

// Baseline: every expert evaluated, outputs weighted by the routing
// indicator and summed.
ArithShare dense_moe(Evaluator& ev, Linear& lin, const ArithShare& x,
                     size_t tokens, const ArithShare& scores,
                     std::span<const ExpertWeights> experts,
                     const MoeOptions& opts = {});

// Plaintext mirror of secure_sparse_moe: each token runs only its selected
// expert.
ArithShare plain_sparse_moe(PlainEvaluator& ev, const ArithShare& x,
                            size_t tokens, const ArithShare& scores,
                            std::span<const ExpertWeights> experts,
                            const MoeOptions& opts = {});

}  // namespace secmoe
