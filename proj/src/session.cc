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

#include "secmoe/session.h"

#include <chrono>
#include <exception>
#include <thread>

namespace secmoe {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

uint64_t dealer_seed(uint64_t seed) { return seed ^ 0x6a09e667f3bcc909ULL; }

PartyOutcome run_one(const SessionConfig& sc, Role role, Endpoint& ep,
                     CorrelationPool pool, const PartyFn& body) {
  const auto t0 = Clock::now();
  Party party(role, ep, std::move(pool), sc.cfg, sc.seed, sc.he);
  party.set_trunc_mode(sc.trunc_mode);
  body(party);
  return {ep.stats(), party.counters(), seconds_since(t0)};
}

bool is_closed(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const Error& err) {
    return err.code() == ErrorCode::kChannelClosed;
  } catch (...) {
    return false;
  }
}

// Runs both roles on two threads. When one side fails its endpoint is closed
// so the other unblocks; the original failure is rethrown in preference to
// the closed-channel errors it causes.
std::pair<PartyOutcome, PartyOutcome> run_pair(const SessionConfig& sc,
                                               CorrelationPool client_pool,
                                               CorrelationPool server_pool,
                                               const PartyFn& body) {
  auto [ce, se] = connect_inproc();
  PartyOutcome out[2];
  std::exception_ptr err[2];
  auto task = [&](int idx, Role role, Endpoint& ep, CorrelationPool pool) {
    try {
      out[idx] = run_one(sc, role, ep, std::move(pool), body);
    } catch (...) {
      err[idx] = std::current_exception();
      ep.close();
    }
  };
  std::thread server(task, 1, Role::kServer, std::ref(se), std::move(server_pool));
  task(0, Role::kClient, ce, std::move(client_pool));
  server.join();
  for (auto& e : err)
    if (e && !is_closed(e)) std::rethrow_exception(e);
  for (auto& e : err)
    if (e) std::rethrow_exception(e);
  return {out[0], out[1]};
}

}  // namespace

Budget estimate(const SessionConfig& sc, const PartyFn& body) {
  // Both roles consume the same correlations; keep the client's count and
  // check the server agrees.
  auto [ce, se] = connect_inproc();
  Budget consumed[2];
  std::exception_ptr err[2];
  auto task = [&](int idx, Role role, Endpoint& ep) {
    try {
      Party party(role, ep, CorrelationPool::counting(sc.cfg.ell), sc.cfg,
                  sc.seed, sc.he);
      party.set_trunc_mode(sc.trunc_mode);
      body(party);
      consumed[idx] = party.pool().consumed();
    } catch (...) {
      err[idx] = std::current_exception();
      ep.close();
    }
  };
  std::thread server(task, 1, Role::kServer, std::ref(se));
  task(0, Role::kClient, ce);
  server.join();
  for (auto& e : err)
    if (e && !is_closed(e)) std::rethrow_exception(e);
  for (auto& e : err)
    if (e) std::rethrow_exception(e);
  SECMOE_ENFORCE(consumed[0] == consumed[1], ErrorCode::kProtocol,
                 "parties disagree on correlation use: {} vs {}",
                 consumed[0].to_string(), consumed[1].to_string());
  return consumed[0];
}

SessionResult run_inproc(const SessionConfig& sc, const PartyFn& body) {
  SessionResult res;
  const auto t0 = Clock::now();
  res.budget = estimate(sc, body);
  auto [cp, sp] = Dealer::deal(res.budget, dealer_seed(sc.seed), sc.cfg.ell);
  if (sc.audit) {
    auto report = Dealer::audit(cp, sp);
    SECMOE_ENFORCE(report.ok(), ErrorCode::kProtocol,
                   "dealer audit failed on {} of {} correlations",
                   report.failed, report.checked);
  }
  res.setup_bytes = res.budget.setup_bytes(sc.cfg.ell);
  res.setup_wall_s = seconds_since(t0);
  auto [c, s] = run_pair(sc, std::move(cp), std::move(sp), body);
  res.client = c;
  res.server = s;
  return res;
}

TcpOutcome run_party(const SessionConfig& sc, Role role, Endpoint& ep,
                     const PartyFn& body) {
  TcpOutcome res;
  res.budget = estimate(sc, body);
  auto [cp, sp] = Dealer::deal(res.budget, dealer_seed(sc.seed), sc.cfg.ell);
  res.setup_bytes = res.budget.setup_bytes(sc.cfg.ell);
  CorrelationPool mine = role == Role::kClient ? std::move(cp) : std::move(sp);
  try {
    res.self = run_one(sc, role, ep, std::move(mine), body);
  } catch (...) {
    ep.close();
    throw;
  }
  return res;
}

}  // namespace secmoe
