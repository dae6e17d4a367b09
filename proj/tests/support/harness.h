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
#include <stdexcept>
#include <vector>

#include "secmoe/evaluator.h"
#include "secmoe/session.h"
#include "secmoe/sharing.h"

namespace secmoe::testing {

inline SessionConfig session_config(int ell = 64, int scale = 18,
                                    uint64_t seed = 1) {
  SessionConfig sc;
  sc.cfg = FixedConfig{ell, scale};
  sc.seed = seed;
  return sc;
}

// Runs `body` as both parties (dry run, dealing, online run) and returns what
// the body produced on the client. Both parties must agree on the result.
inline std::vector<uint64_t> run_revealed(
    const SessionConfig& sc,
    const std::function<std::vector<uint64_t>(Party&)>& body,
    SessionResult* result = nullptr) {
  std::vector<uint64_t> out[2];
  auto res = run_inproc(sc, [&](Party& p) { out[p.is_client() ? 0 : 1] = body(p); });
  if (out[0] != out[1]) throw std::runtime_error("parties disagree on output");
  if (result) *result = res;
  return out[0];
}

inline ArithShare client_input(Party& p, const std::vector<uint64_t>& values,
                               int frac) {
  return share_input(p, Role::kClient, p.is_client() ? &values : nullptr,
                     values.size(), frac);
}

inline ArithShare client_input(Evaluator& ev, Role role,
                               const std::vector<uint64_t>& values, int frac) {
  return ev.input(Role::kClient, role == Role::kClient ? &values : nullptr,
                  values.size(), frac);
}

using EvalFn = std::function<ArithShare(Evaluator&, const ArithShare&)>;

// fn over the plaintext evaluator.
inline std::vector<uint64_t> eval_plain(const FixedConfig& cfg,
                                        const std::vector<uint64_t>& x,
                                        int frac, const EvalFn& fn,
                                        OpCounters* counters = nullptr) {
  PlainEvaluator ev(cfg);
  auto out = fn(ev, ev.input(Role::kClient, &x, x.size(), frac));
  if (counters) *counters = ev.counters();
  return out.v;
}

// fn over the two-party evaluator; x is the client's input.
inline std::vector<uint64_t> eval_secure(const SessionConfig& sc,
                                         const std::vector<uint64_t>& x,
                                         int frac, const EvalFn& fn,
                                         SessionResult* result = nullptr) {
  return run_revealed(
      sc,
      [&](Party& p) {
        SecureEvaluator ev(p);
        auto in = client_input(p, x, frac);
        return ev.reveal(fn(ev, in));
      },
      result);
}

// Error code thrown by f, or nullopt when it returns normally.
template <class F>
std::optional<ErrorCode> thrown_code(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

inline std::vector<uint64_t> encode_all(const std::vector<double>& xs,
                                        const FixedConfig& cfg) {
  std::vector<uint64_t> out;
  out.reserve(xs.size());
  for (double x : xs) out.push_back(encode(x, cfg));
  return out;
}

}  // namespace secmoe::testing
