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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "secmoe/evaluator.h"
#include "secmoe/party.h"
#include "secmoe/protocols/layers.h"
#include "secmoe/ring.h"
#include "secmoe/transport.h"

namespace secmoe {

struct ModelConfig {
  std::string name = "custom";
  size_t d_model = 64;
  size_t d_ff = 128;
  size_t num_heads = 4;
  size_t num_layers = 2;
  size_t n_experts = 8;
  size_t k_experts = 1;
  size_t seq_len = 8;

  void validate() const;
  size_t head_dim() const { return d_model / num_heads; }
  bool operator==(const ModelConfig&) const = default;

  // "toy-moe-<E>e" (64/128/4 heads/2 layers) or "tiny-moe-<E>e"
  // (16/32/2 heads/1 layer), E >= 1.
  static ModelConfig named(std::string_view name);
};

struct LayerWeights {
  AttentionWeights attn;
  FixedTensor ln1_gamma, ln1_beta;  // d_model
  FixedTensor gate;                 // d_model x n_experts
  std::vector<ExpertWeights> experts;
  FixedTensor ln2_gamma, ln2_beta;
};

struct WeightStore {
  ModelConfig config;
  FixedConfig fixed;
  uint64_t seed = 0;
  std::vector<LayerWeights> layers;

  // Every tensor under a stable name, in serialization order.
  std::vector<std::pair<std::string, const FixedTensor*>> tensors() const;
  std::vector<std::pair<std::string, FixedTensor*>> tensors();
  // Checks every tensor against the dimensions the config implies.
  void validate() const;
  bool operator==(const WeightStore& o) const;
};

// Uniform values in [-0.1, 0.1], encoded at the given fixed-point config.
// Deterministic in the seed.
WeightStore gen_weights(const ModelConfig& cfg, uint64_t seed,
                        FixedConfig fixed = {});
// All-zero tensors of the right shapes, for the party without the model.
WeightStore shape_only(const ModelConfig& cfg, FixedConfig fixed = {});

// A directory holding manifest.txt and one little-endian blob per tensor.
void save_weights(const WeightStore& store, const std::filesystem::path& dir);
WeightStore load_weights(const std::filesystem::path& dir);
// Config, seed and fixed-point parameters from the manifest alone.
WeightStore load_manifest(const std::filesystem::path& dir);

// Tokens as text: one row per token, whitespace-separated reals.
FixedTensor read_tokens(const std::filesystem::path& path, const ModelConfig& cfg,
                        FixedConfig fixed = {});
std::vector<std::vector<double>> parse_token_text(std::string_view text);

enum class MoeProtocol { kSecMoe, kDense };
std::string_view protocol_name(MoeProtocol p);
MoeProtocol parse_protocol(std::string_view name);

struct ForwardOptions {
  MoeProtocol protocol = MoeProtocol::kSecMoe;
  MoeOptions moe;
};

// Channel traffic per named phase of each layer.
struct LayerTrace {
  std::vector<std::pair<std::string, ChannelStats>> phases;
  // Selection and compute parts of the "moe" phase (sparse protocol only).
  std::optional<MoePhaseStats> moe_split;
};
struct ForwardTrace {
  std::vector<LayerTrace> layers;
};

// Fixed-point forward pass on plaintext. Same truncation points and
// approximations as the secure pass, so the two agree bit for bit.
FixedTensor plain_forward(const WeightStore& store, const FixedTensor& tokens,
                          const MoeOptions& opts = {});

// Real-valued mirror of plain_forward in double precision, keeping only the
// polynomial GeLU fit and the iterated exponential.
std::vector<double> shadow_forward(const WeightStore& store,
                                   const std::vector<double>& tokens,
                                   const MoeOptions& opts = {});

// One party's side of the secure forward. The client holds the tokens (the
// server passes a shape-only share) and the server the weights (the client
// passes shape_only). Returns the party's share of the output.
ArithShare secure_forward(Party& p, const WeightStore& store,
                          const ArithShare& tokens,
                          const ForwardOptions& opts = {},
                          ForwardTrace* trace = nullptr);

}  // namespace secmoe
