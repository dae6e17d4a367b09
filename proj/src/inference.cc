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

#include "secmoe/inference.h"

#include <chrono>

#include "json.hpp"

#include "secmoe/prg.h"
#include "secmoe/sharing.h"

namespace secmoe {

namespace {

using json = nlohmann::ordered_json;

SessionConfig session_for(const WeightStore& w, const InferenceOptions& o) {
  SessionConfig sc;
  sc.cfg = w.fixed;
  sc.he = o.he;
  sc.seed = o.seed;
  sc.audit = o.audit;
  return sc;
}

InferenceReport base_report(const WeightStore& w, const InferenceOptions& o) {
  InferenceReport r;
  r.config = w.config;
  r.protocol = o.forward.protocol;
  r.gate_scaling = o.forward.moe.gate_scaling;
  r.net = o.net;
  return r;
}

void check_tokens(const WeightStore& w, const FixedTensor& tokens) {
  SECMOE_ENFORCE(tokens.size() == w.config.seq_len * w.config.d_model,
                 ErrorCode::kDimensionMismatch,
                 "tokens hold {} values, the model expects {}x{}",
                 tokens.size(), w.config.seq_len, w.config.d_model);
  SECMOE_ENFORCE(tokens.config() == w.fixed, ErrorCode::kScaleMismatch,
                 "tokens and weights use different fixed-point configs");
}

// The protocol body shared by every mode. Each party picks the data it owns;
// the other side's data only provides shapes.
struct Body {
  const WeightStore& client_layout;
  const WeightStore& server_weights;
  const FixedTensor& tokens;  // zeros on a server-only process
  const ForwardOptions& fwd;
  // Client results, written on every run; the last (online) one wins.
  std::vector<uint64_t> out;
  ForwardTrace trace;

  void operator()(Party& p) {
    const bool client = p.is_client();
    const WeightStore& w = client ? client_layout : server_weights;
    ArithShare x = share_input(p, Role::kClient, client ? &tokens.raw() : nullptr,
                               tokens.size(), w.fixed.scale);
    ForwardTrace tr;
    ArithShare y = secure_forward(p, w, x, fwd, client ? &tr : nullptr);
    auto revealed = reveal_to(p, y, Role::kClient);
    if (client) {
      out = std::move(revealed);
      trace = std::move(tr);
    }
  }
};

}  // namespace

InferenceResult infer_inproc(const WeightStore& weights,
                             const FixedTensor& tokens,
                             const InferenceOptions& opts) {
  check_tokens(weights, tokens);
  const WeightStore layout = shape_only(weights.config, weights.fixed);
  Body body{layout, weights, tokens, opts.forward, {}, {}};
  SessionResult s =
      run_inproc(session_for(weights, opts), [&](Party& p) { body(p); });
  InferenceResult res;
  res.output = FixedTensor({weights.config.seq_len, weights.config.d_model},
                           std::move(body.out), weights.fixed);
  auto& r = res.report = base_report(weights, opts);
  r.online = s.client.stats;
  r.budget = s.budget;
  r.setup_bytes = s.setup_bytes;
  r.client_counters = s.client.counters;
  r.server_counters = s.server.counters;
  r.wall_s = s.client.wall_s;
  r.setup_wall_s = s.setup_wall_s;
  r.trace = std::move(body.trace);
  return res;
}

namespace {

InferenceResult infer_one(Endpoint& ep, Role role, const WeightStore& layout,
                          const WeightStore& weights, const FixedTensor& tokens,
                          const InferenceOptions& opts) {
  Body body{layout, weights, tokens, opts.forward, {}, {}};
  const auto t0 = std::chrono::steady_clock::now();
  TcpOutcome o = run_party(session_for(weights, opts), role, ep,
                           [&](Party& p) { body(p); });
  InferenceResult res;
  auto& r = res.report = base_report(weights, opts);
  r.transport = "tcp";
  r.role = std::string(role_name(role));
  r.online = o.self.stats;
  r.budget = o.budget;
  r.setup_bytes = o.setup_bytes;
  (role == Role::kClient ? r.client_counters : r.server_counters) = o.self.counters;
  r.wall_s = o.self.wall_s;
  r.setup_wall_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count() -
      o.self.wall_s;
  if (role == Role::kClient) {
    res.output = FixedTensor({weights.config.seq_len, weights.config.d_model},
                             std::move(body.out), weights.fixed);
    r.trace = std::move(body.trace);
  }
  return res;
}

}  // namespace

InferenceResult infer_client(Endpoint& ep, const WeightStore& layout,
                             const FixedTensor& tokens,
                             const InferenceOptions& opts) {
  check_tokens(layout, tokens);
  const WeightStore zeros = shape_only(layout.config, layout.fixed);
  return infer_one(ep, Role::kClient, zeros, zeros, tokens, opts);
}

InferenceResult infer_server(Endpoint& ep, const WeightStore& weights,
                             const InferenceOptions& opts) {
  weights.validate();
  const WeightStore layout = shape_only(weights.config, weights.fixed);
  const FixedTensor zeros({weights.config.seq_len, weights.config.d_model},
                          weights.fixed);
  return infer_one(ep, Role::kServer, layout, weights, zeros, opts);
}

// ---------------------------------------------------------------------------
// Reports

namespace {

json stats_json(const ChannelStats& s) {
  return {{"bytes_c_to_s", s.bytes_c_to_s},
          {"bytes_s_to_c", s.bytes_s_to_c},
          {"bytes_total", s.total_bytes()},
          {"frame_bytes_c_to_s", s.frame_bytes_c_to_s},
          {"frame_bytes_s_to_c", s.frame_bytes_s_to_c},
          {"messages_c_to_s", s.messages_c_to_s},
          {"messages_s_to_c", s.messages_s_to_c},
          {"rounds", s.rounds}};
}

json counters_json(const OpCounters& c) {
  return {{"mul", c.mul},           {"trunc", c.trunc},
          {"msb", c.msb},           {"and_bits", c.and_bits},
          {"b2a", c.b2a},           {"mux_public", c.mux_public},
          {"mux", c.mux},           {"compare", c.compare},
          {"matmul_ss", c.matmul_ss}, {"he_encrypt", c.he_encrypt},
          {"he_decrypt", c.he_decrypt}, {"he_mul_ct", c.he_mul_ct},
          {"he_mul_plain", c.he_mul_plain}};
}

json config_json(const ModelConfig& c) {
  return {{"name", c.name},         {"d_model", c.d_model},
          {"d_ff", c.d_ff},         {"num_heads", c.num_heads},
          {"num_layers", c.num_layers}, {"n_experts", c.n_experts},
          {"k_experts", c.k_experts}, {"seq_len", c.seq_len}};
}

json modeled_json(const ChannelStats& s, const std::optional<NetProfile>& net) {
  return {{"selected", net ? json(modeled_time(s, *net)) : json(nullptr)},
          {"lan", modeled_time(s, NetProfile::lan())},
          {"wan", modeled_time(s, NetProfile::wan())}};
}

}  // namespace

std::string report_json(const InferenceReport& r, int indent) {
  json layers = json::array();
  for (size_t l = 0; l < r.trace.layers.size(); ++l) {
    const auto& lt = r.trace.layers[l];
    json phases = json::array();
    for (const auto& [name, st] : lt.phases) {
      json ph = stats_json(st);
      ph["name"] = name;
      phases.push_back(std::move(ph));
    }
    json entry = {{"layer", l}, {"phases", std::move(phases)}};
    if (lt.moe_split) {
      entry["moe_selection"] = stats_json(lt.moe_split->selection);
      entry["moe_compute"] = stats_json(lt.moe_split->compute);
    }
    layers.push_back(std::move(entry));
  }
  json counters = json::object();
  if (r.client_counters) counters["client"] = counters_json(*r.client_counters);
  if (r.server_counters) counters["server"] = counters_json(*r.server_counters);
  json j = {
      {"schema", kReportSchema},
      {"kind", "infer"},
      {"config", config_json(r.config)},
      {"protocol", protocol_name(r.protocol)},
      {"gate_scaling", r.gate_scaling},
      {"transport", r.transport},
      {"role", r.role},
      {"net", r.net ? json(r.net->name) : json("none")},
      {"bytes_online", stats_json(r.online)},
      {"bytes_setup_modeled", r.setup_bytes},
      {"correlations", r.budget.to_string()},
      {"rounds", r.online.rounds},
      {"wall_time_s", r.wall_s},
      {"setup_wall_time_s", r.setup_wall_s},
      {"modeled_time_s", modeled_json(r.online, r.net)},
      {"counters", std::move(counters)},
      {"layers", std::move(layers)},
  };
  return j.dump(indent);
}

// ---------------------------------------------------------------------------
// Expert sweep

std::vector<BenchRow> run_bench(const BenchOptions& opts) {
  std::vector<BenchRow> rows;
  for (size_t e : opts.experts) {
    const ModelConfig cfg =
        ModelConfig::named(fmt::format("{}-{}e", opts.family, e));
    const WeightStore w = gen_weights(cfg, opts.weight_seed);
    // Fixed tokens so every row sees the same activations.
    std::vector<double> xs(cfg.seq_len * cfg.d_model);
    Prg prg(opts.weight_seed, 0x746f6b656eULL);
    for (auto& x : xs) x = 2.0 * prg.next_unit() - 1.0;
    const FixedTensor tokens =
        FixedTensor::from_reals({cfg.seq_len, cfg.d_model}, xs, w.fixed);
    for (MoeProtocol proto : opts.protocols) {
      InferenceOptions io = opts.inference;
      io.forward.protocol = proto;
      const auto res = infer_inproc(w, tokens, io);
      BenchRow row;
      row.n_experts = e;
      row.protocol = proto;
      row.online = res.report.online;
      for (const auto& lt : res.report.trace.layers)
        for (const auto& [name, st] : lt.phases)
          if (name == "moe") {
            row.moe_layer.bytes_c_to_s += st.bytes_c_to_s;
            row.moe_layer.bytes_s_to_c += st.bytes_s_to_c;
            row.moe_layer.frame_bytes_c_to_s += st.frame_bytes_c_to_s;
            row.moe_layer.frame_bytes_s_to_c += st.frame_bytes_s_to_c;
            row.moe_layer.messages_c_to_s += st.messages_c_to_s;
            row.moe_layer.messages_s_to_c += st.messages_s_to_c;
            row.moe_layer.rounds += st.rounds;
          }
      row.setup_bytes = res.report.setup_bytes;
      row.wall_s = res.report.wall_s;
      if (opts.on_row) opts.on_row(row);
      rows.push_back(row);
    }
  }
  return rows;
}

double flatness_ratio(const std::vector<BenchRow>& rows, MoeProtocol protocol,
                      size_t min_experts) {
  const BenchRow* lo = nullptr;
  const BenchRow* hi = nullptr;
  for (const auto& r : rows) {
    if (r.protocol != protocol || r.n_experts < min_experts) continue;
    if (!lo || r.n_experts < lo->n_experts) lo = &r;
    if (!hi || r.n_experts > hi->n_experts) hi = &r;
  }
  if (!lo || lo->moe_layer.total_bytes() == 0) return 0.0;
  return static_cast<double>(hi->moe_layer.total_bytes()) /
         static_cast<double>(lo->moe_layer.total_bytes());
}

std::string bench_json(const BenchOptions& opts,
                       const std::vector<BenchRow>& rows, int indent) {
  json table = json::array();
  for (const auto& r : rows) {
    table.push_back({{"n_experts", r.n_experts},
                     {"protocol", protocol_name(r.protocol)},
                     {"online_bytes", r.online.total_bytes()},
                     {"moe_online_bytes", r.moe_layer.total_bytes()},
                     {"setup_bytes_modeled", r.setup_bytes},
                     {"rounds", r.online.rounds},
                     {"wall_time_s", r.wall_s},
                     {"modeled_lan_time_s", modeled_time(r.online, NetProfile::lan())},
                     {"modeled_wan_time_s", modeled_time(r.online, NetProfile::wan())}});
  }
  json flat = json::object();
  for (MoeProtocol p : opts.protocols) {
    flat[std::string(protocol_name(p))] = {
        {"all", flatness_ratio(rows, p)},
        {"from_8_experts", flatness_ratio(rows, p, 8)}};
  }
  json j = {{"schema", kBenchSchema},
            {"kind", "bench"},
            {"family", opts.family},
            {"gate_scaling", opts.inference.forward.moe.gate_scaling},
            {"weight_seed", opts.weight_seed},
            {"seed", opts.inference.seed},
            {"rows", std::move(table)},
            {"flatness_ratio", std::move(flat)}};
  return j.dump(indent);
}

}  // namespace secmoe
