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

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "secmoe/model.h"
#include "secmoe/session.h"
#include "secmoe/transport.h"

namespace secmoe {

struct InferenceOptions {
  ForwardOptions forward;
  uint64_t seed = 1;  // party and dealer randomness
  he::HeParams he;
  std::optional<NetProfile> net = NetProfile::lan();
  bool audit = false;
};

// Costs of one secure forward as seen from one endpoint.
struct InferenceReport {
  ModelConfig config;
  MoeProtocol protocol = MoeProtocol::kSecMoe;
  bool gate_scaling = false;
  std::string transport = "inproc";
  std::string role = "both";
  std::optional<NetProfile> net;
  ChannelStats online;
  Budget budget;
  uint64_t setup_bytes = 0;
  // Per party; a TCP run only knows its own.
  std::optional<OpCounters> client_counters, server_counters;
  double wall_s = 0;
  double setup_wall_s = 0;
  ForwardTrace trace;
};

struct InferenceResult {
  FixedTensor output;  // empty on the server
  InferenceReport report;
};

// Both parties in this process. The client side sees only the weight
// shapes; the server side sees only zero placeholders for the tokens.
InferenceResult infer_inproc(const WeightStore& weights,
                             const FixedTensor& tokens,
                             const InferenceOptions& opts);

// One party over an established channel. The client passes the model layout
// (e.g. from load_manifest) and its tokens, the server its weights.
InferenceResult infer_client(Endpoint& ep, const WeightStore& layout,
                             const FixedTensor& tokens,
                             const InferenceOptions& opts);
InferenceResult infer_server(Endpoint& ep, const WeightStore& weights,
                             const InferenceOptions& opts);

// Versioned JSON for a single inference.
inline constexpr std::string_view kReportSchema = "secmoe.report/1";
std::string report_json(const InferenceReport& r, int indent = 2);

// Expert-count sweep.
struct BenchRow {
  size_t n_experts = 0;
  MoeProtocol protocol = MoeProtocol::kSecMoe;
  ChannelStats online;     // whole forward
  ChannelStats moe_layer;  // MoE phases summed over layers
  uint64_t setup_bytes = 0;
  double wall_s = 0;
};
struct BenchOptions {
  std::string family = "toy-moe";
  std::vector<size_t> experts = {2, 4, 8, 16, 32, 64, 128};
  std::vector<MoeProtocol> protocols = {MoeProtocol::kSecMoe,
                                        MoeProtocol::kDense};
  uint64_t weight_seed = 1;
  InferenceOptions inference;
  // Optional progress sink, one line per finished row.
  std::function<void(const BenchRow&)> on_row;
};
std::vector<BenchRow> run_bench(const BenchOptions& opts);
// Online MoE-layer bytes at the largest expert count over those at the
// smallest, per protocol, taken over rows with n_experts >= min_experts.
double flatness_ratio(const std::vector<BenchRow>& rows, MoeProtocol protocol,
                      size_t min_experts = 0);
inline constexpr std::string_view kBenchSchema = "secmoe.bench/1";
std::string bench_json(const BenchOptions& opts,
                       const std::vector<BenchRow>& rows, int indent = 2);

}  // namespace secmoe
