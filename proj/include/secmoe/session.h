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
#include <functional>

#include "secmoe/dealer.h"
#include "secmoe/he.h"
#include "secmoe/party.h"
#include "secmoe/ring.h"
#include "secmoe/transport.h"

namespace secmoe {

struct SessionConfig {
  FixedConfig cfg;
  he::HeParams he;
  uint64_t seed = 1;
  TruncMode trunc_mode = TruncMode::kExact;
  // Reconstruct and check every dealt correlation before the online phase.
  bool audit = false;
};

// The protocol body, run once per role. It must follow the same message
// schedule for any input values, which is what lets a dry run with counting
// pools size the dealer's output.
using PartyFn = std::function<void(Party&)>;

struct PartyOutcome {
  ChannelStats stats;
  OpCounters counters;
  double wall_s = 0;
};

struct SessionResult {
  PartyOutcome client, server;
  Budget budget;
  uint64_t setup_bytes = 0;  // modeled dealer traffic, both parties
  double setup_wall_s = 0;   // dry run plus dealing
};

// Dry run of both roles over an in-process channel with counting pools.
Budget estimate(const SessionConfig& sc, const PartyFn& body);

// Estimate, deal, then run both roles concurrently in process.
SessionResult run_inproc(const SessionConfig& sc, const PartyFn& body);

// One role over an established endpoint. The dry run happens locally, so
// `body` must be runnable for both roles in this process (the peer's private
// inputs replaced by placeholders of the right shape).
struct TcpOutcome {
  PartyOutcome self;
  Budget budget;
  uint64_t setup_bytes = 0;
};
TcpOutcome run_party(const SessionConfig& sc, Role role, Endpoint& ep,
                     const PartyFn& body);

}  // namespace secmoe
