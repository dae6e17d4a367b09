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

// secmoe: weight generation, secure inference, expert sweeps and selftests.
//
// Exit codes: 0 success, 2 usage, 3 protocol or verification failure, 4 I/O.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "secmoe/inference.h"
#include "secmoe/model.h"
#include "secmoe/selftest.h"

namespace {

using namespace secmoe;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitProtocol = 3;
constexpr int kExitIo = 4;

// Overrides the default --net when the flag is not given.
constexpr const char* kNetEnv = "SECMOE_NET";

int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::kIo:
    case ErrorCode::kMalformedFile:
    case ErrorCode::kConnectionRefused:
    case ErrorCode::kTimeout:
    case ErrorCode::kChannelClosed:
      return kExitIo;
    case ErrorCode::kInvalidConfig:
    case ErrorCode::kParameter:
    case ErrorCode::kUnsupportedK:
      return kExitUsage;
    default:
      return kExitProtocol;
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text << "\n";
    return;
  }
  std::ofstream out(path, std::ios::trunc);
  SECMOE_ENFORCE(out.good(), ErrorCode::kIo, "cannot open {} for writing", path);
  out << text << "\n";
  SECMOE_ENFORCE(out.good(), ErrorCode::kIo, "write to {} failed", path);
}

std::string tensor_text(const FixedTensor& t) {
  std::string out;
  const auto vals = t.to_reals();
  for (size_t r = 0; r < t.rows(); ++r) {
    for (size_t c = 0; c < t.cols(); ++c)
      out += fmt::format("{}{:.8f}", c ? " " : "", vals[r * t.cols() + c]);
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------

struct GenArgs {
  std::string config;
  uint64_t seed = 1;
  std::string out;
};

int cmd_gen_weights(const GenArgs& a) {
  const auto cfg = ModelConfig::named(a.config);
  save_weights(gen_weights(cfg, a.seed), a.out);
  std::cerr << fmt::format("wrote {} ({} layers, {} experts) to {}\n",
                           cfg.name, cfg.num_layers, cfg.n_experts, a.out);
  return kExitOk;
}

struct InferArgs {
  std::string weights;
  std::string input;
  std::string net;
  std::string transport = "inproc";
  std::string role = "both";
  std::string protocol = "secmoe";
  std::string addr = "127.0.0.1:7878";
  std::string output = "-";
  std::string report = "-";
  uint64_t seed = 1;
  bool gate_scaling = false;
  bool audit = false;
  bool check = false;
  double timeout_s = 60;
};

std::optional<NetProfile> resolve_net(const std::string& flag) {
  std::string name = flag;
  if (name.empty()) {
    const char* env = std::getenv(kNetEnv);
    name = env && *env ? env : "lan";
  }
  auto net = NetProfile::parse(name);
  if (net) net->validate();
  return net;
}

int cmd_infer(const InferArgs& a) {
  InferenceOptions opts;
  opts.forward.protocol = parse_protocol(a.protocol);
  opts.forward.moe.gate_scaling = a.gate_scaling;
  opts.seed = a.seed;
  opts.net = resolve_net(a.net);
  opts.audit = a.audit;
  const auto timeout = std::chrono::milliseconds(
      static_cast<int64_t>(a.timeout_s * 1000));

  InferenceResult res;
  if (a.transport == "inproc") {
    SECMOE_ENFORCE(a.role == "both", ErrorCode::kParameter,
                   "the in-process transport runs both roles (--role both)");
    const auto weights = load_weights(a.weights);
    const auto tokens = read_tokens(a.input, weights.config, weights.fixed);
    res = infer_inproc(weights, tokens, opts);
    if (a.check) {
      const auto expect = plain_forward(weights, tokens, opts.forward.moe);
      SECMOE_ENFORCE(expect == res.output, ErrorCode::kProtocol,
                     "secure output differs from the plaintext forward");
      std::cerr << "check: secure output equals the plaintext forward\n";
    }
  } else if (a.transport == "tcp") {
    if (a.role == "client") {
      // The client only needs the layout in the manifest.
      const auto layout = load_manifest(a.weights);
      const auto tokens = read_tokens(a.input, layout.config, layout.fixed);
      Endpoint ep = connect_tcp(a.addr, Role::kClient, timeout);
      res = infer_client(ep, layout, tokens, opts);
      ep.close();
    } else if (a.role == "server") {
      const auto weights = load_weights(a.weights);
      Endpoint ep = connect_tcp(a.addr, Role::kServer, timeout);
      res = infer_server(ep, weights, opts);
      ep.close();
    } else {
      SECMOE_THROW(ErrorCode::kParameter,
                   "tcp runs one role per process (--role client|server)");
    }
  } else {
    SECMOE_THROW(ErrorCode::kParameter, "unknown transport '{}'",
                 a.transport);
  }
  if (res.output.size() > 0) write_text(a.output, tensor_text(res.output));
  write_text(a.report, report_json(res.report));
  return kExitOk;
}

struct BenchArgs {
  std::string experts = "2,4,8,16,32,64,128";
  std::string protocol = "both";
  std::string family = "toy-moe";
  std::string out = "-";
  std::string net;
  uint64_t seed = 1;
  bool gate_scaling = false;
};

std::vector<size_t> parse_list(const std::string& s) {
  std::vector<size_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    size_t pos = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    SECMOE_ENFORCE(pos == item.size() && !item.empty() && v > 0,
                   ErrorCode::kParameter, "bad expert count '{}'", item);
    out.push_back(v);
  }
  SECMOE_ENFORCE(!out.empty(), ErrorCode::kParameter, "no expert counts");
  return out;
}

int cmd_bench(const BenchArgs& a) {
  BenchOptions opts;
  opts.family = a.family;
  opts.experts = parse_list(a.experts);
  if (a.protocol == "both") {
    opts.protocols = {MoeProtocol::kSecMoe, MoeProtocol::kDense};
  } else {
    opts.protocols = {parse_protocol(a.protocol)};
  }
  opts.weight_seed = a.seed;
  opts.inference.seed = a.seed;
  opts.inference.net = resolve_net(a.net);
  opts.inference.forward.moe.gate_scaling = a.gate_scaling;
  opts.on_row = [](const BenchRow& r) {
    std::cerr << fmt::format("{:>4} experts  {:<6}  online {:>12} B  moe {:>12} B  {:>6.2f} s\n",
                             r.n_experts, protocol_name(r.protocol),
                             r.online.total_bytes(), r.moe_layer.total_bytes(),
                             r.wall_s);
  };
  const auto rows = run_bench(opts);
  for (MoeProtocol p : opts.protocols)
    std::cerr << fmt::format("flatness {}: {:.3f}\n", protocol_name(p),
                             flatness_ratio(rows, p));
  write_text(a.out, bench_json(opts, rows));
  return kExitOk;
}

int cmd_selftest(const std::string& level) {
  SECMOE_ENFORCE(level == "quick" || level == "full", ErrorCode::kParameter,
                 "unknown selftest level '{}'", level);
  const auto results = run_selftest(
      level == "full" ? SelftestLevel::kFull : SelftestLevel::kQuick,
      [](const SuiteResult& r) {
        std::cout << fmt::format("{} {}: {}/{} passed ({:.2f} s){}\n",
                                 r.ok() ? "PASS" : "FAIL", r.name,
                                 r.checked - r.failed, r.checked, r.seconds,
                                 r.first_failure.empty()
                                     ? ""
                                     : "  first failure: " + r.first_failure);
        std::cout.flush();
      });
  size_t failed = 0;
  for (const auto& r : results) failed += !r.ok();
  std::cout << fmt::format("{} of {} suites passed\n", results.size() - failed,
                           results.size());
  return failed ? kExitProtocol : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Secure two-party inference for sparse mixture-of-experts models"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen-weights", "Generate a random model");
  g->add_option("--config", gen.config, "toy-moe-<E>e or tiny-moe-<E>e")->required();
  g->add_option("--seed", gen.seed, "Weight seed");
  g->add_option("--out", gen.out, "Output directory")->required();

  InferArgs inf;
  auto* i = app.add_subcommand("infer", "Run a secure forward pass");
  i->add_option("--weights", inf.weights, "Weight directory")->required();
  i->add_option("--input", inf.input, "Token file (one row per token)")->required();
  i->add_option("--net", inf.net, fmt::format("lan|wan|none (default ${} or lan)", kNetEnv))
      ->check(CLI::IsMember({"lan", "wan", "none"}));
  i->add_option("--transport", inf.transport)->check(CLI::IsMember({"inproc", "tcp"}));
  i->add_option("--role", inf.role)->check(CLI::IsMember({"client", "server", "both"}));
  i->add_option("--protocol", inf.protocol)->check(CLI::IsMember({"secmoe", "dense"}));
  i->add_option("--addr", inf.addr, "host:port for tcp");
  i->add_option("--seed", inf.seed, "Session seed (shared by both parties)");
  i->add_option("--output", inf.output, "Output tensor file, - for stdout");
  i->add_option("--report", inf.report, "JSON report file, - for stdout");
  i->add_option("--timeout", inf.timeout_s, "TCP connect/accept timeout in seconds");
  i->add_flag("--gate-scaling", inf.gate_scaling, "Scale expert outputs by the gate weight");
  i->add_flag("--audit", inf.audit, "Audit dealt correlations before the online phase");
  i->add_flag("--check", inf.check, "Compare against the plaintext forward (inproc)");

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Sweep expert counts");
  b->add_option("--experts", bench.experts, "Comma-separated expert counts");
  b->add_option("--protocol", bench.protocol)->check(CLI::IsMember({"secmoe", "dense", "both"}));
  b->add_option("--family", bench.family)->check(CLI::IsMember({"toy-moe", "tiny-moe"}));
  b->add_option("--out", bench.out, "JSON report file, - for stdout");
  b->add_option("--net", bench.net)->check(CLI::IsMember({"lan", "wan", "none"}));
  b->add_option("--seed", bench.seed);
  b->add_flag("--gate-scaling", bench.gate_scaling);

  std::string level = "quick";
  auto* s = app.add_subcommand("selftest", "Oracle-equivalence suites");
  s->add_option("--level", level)->check(CLI::IsMember({"quick", "full"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*g) return cmd_gen_weights(gen);
    if (*i) return cmd_infer(inf);
    if (*b) return cmd_bench(bench);
    if (*s) return cmd_selftest(level);
  } catch (const Error& e) {
    std::cerr << fmt::format("error ({}): {}\n", error_code_name(e.code()), e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitProtocol;
  }
  return kExitUsage;
}
