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
#include <optional>

#include "secmoe/dealer.h"
#include "secmoe/he.h"
#include "secmoe/prg.h"
#include "secmoe/ring.h"
#include "secmoe/transport.h"

namespace secmoe {

enum class TruncMode {
  kExact,  // dealer-assisted, reconstructs to the arithmetic shift exactly
  kLocal,  // communication-free, off by one ulp or (rarely) by 2^(ell-s)
};

// Invocation counters; elements are summed over batched calls.
struct OpCounters {
  uint64_t mul = 0;        // ring products (Beaver)
  uint64_t trunc = 0;      // truncations
  uint64_t msb = 0;        // sign extractions
  uint64_t and_bits = 0;   // boolean ANDs
  uint64_t b2a = 0;        // boolean to arithmetic conversions
  uint64_t mux_public = 0; // selections of a public value
  uint64_t mux = 0;        // selections of a shared value
  uint64_t compare = 0;    // threshold comparisons
  uint64_t matmul_ss = 0;  // share-by-share matrix products
  uint64_t he_encrypt = 0;
  uint64_t he_decrypt = 0;
  uint64_t he_mul_ct = 0;    // ciphertext-ciphertext products
  uint64_t he_mul_plain = 0; // ciphertext-plaintext products

  OpCounters& operator+=(const OpCounters& o);
  bool operator==(const OpCounters&) const = default;
};
OpCounters operator-(const OpCounters& a, const OpCounters& b);

// One party's view of a protocol session: its role, channel, correlated
// randomness, private randomness and HE material.
class Party {
 public:
  Party(Role role, Endpoint& endpoint, CorrelationPool pool, FixedConfig cfg,
        uint64_t seed, he::HeParams he_params = {});

  Role role() const { return role_; }
  bool is_client() const { return role_ == Role::kClient; }
  // Dry runs (counting pools) skip heavy local work whose values do not
  // influence control flow.
  bool dry() const { return pool_.is_counting(); }

  Endpoint& ep() { return *ep_; }
  CorrelationPool& pool() { return pool_; }
  Prg& prg() { return prg_; }
  const FixedConfig& cfg() const { return cfg_; }
  int ell() const { return cfg_.ell; }
  uint64_t mask() const { return cfg_.mask(); }
  size_t ring_bytes() const { return (static_cast<size_t>(cfg_.ell) + 7) / 8; }

  TruncMode trunc_mode() const { return trunc_mode_; }
  void set_trunc_mode(TruncMode m) { trunc_mode_ = m; }

  OpCounters& counters() { return counters_; }

  const he::Engine& he() const { return he_; }
  // Client only.
  he::SecretKey& secret_key();

 private:
  Role role_;
  Endpoint* ep_;
  CorrelationPool pool_;
  FixedConfig cfg_;
  Prg prg_;
  TruncMode trunc_mode_ = TruncMode::kExact;
  OpCounters counters_;
  he::Engine he_;
  std::optional<he::SecretKey> sk_;
};

}  // namespace secmoe
