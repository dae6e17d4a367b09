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
#include <string>
#include <utility>
#include <vector>

#include "secmoe/bitvec.h"
#include "secmoe/common.h"

namespace secmoe {

// Dimensions (rows, inner, cols) of a matrix Beaver triple.
using MatDims = std::array<uint64_t, 3>;

// Number of correlations of each kind a protocol run consumes.
struct Budget {
  uint64_t triples = 0;    // arithmetic (a, b, ab)
  uint64_t and_bits = 0;   // boolean (a, b, a&b)
  uint64_t msb_masks = 0;  // r with its bit decomposition
  uint64_t bit_corrs = 0;  // random bit, boolean and arithmetic
  uint64_t mux_corrs = 0;  // random bit rho, a, rho*a
  std::map<int, uint64_t> trunc_masks;     // keyed by shift
  std::map<MatDims, uint64_t> mat_triples;  // keyed by dims

  bool empty() const;
  Budget& operator+=(const Budget& o);
  bool operator==(const Budget&) const = default;

  // Bytes a dealer would ship to both parties for this budget.
  uint64_t setup_bytes(int ell) const;
  std::string to_string() const;
};

struct TripleBatch {
  std::vector<uint64_t> a, b, c;
};
struct AndBatch {
  BitVec a, b, c;
};
struct MsbBatch {
  std::vector<uint64_t> r;     // arithmetic share of r
  std::vector<uint64_t> bits;  // xor share of the bits of r
};
struct TruncBatch {
  std::vector<uint64_t> r;
  std::vector<uint64_t> r_hi;  // arithmetic share of r >> shift (logical)
  std::vector<uint64_t> bits;
};
struct BitBatch {
  BitVec rho_bool;
  std::vector<uint64_t> rho;
};
struct MuxBatch {
  BitVec rho_bool;
  std::vector<uint64_t> rho, a, rho_a;
};
struct MatTriple {
  std::vector<uint64_t> a, b, c;  // row-major k*m, m*n, k*n
};

// One party's correlated randomness, consumed front to back. A pool in
// counting mode hands out zeros and only records demand, which is how budgets
// are estimated.
class CorrelationPool {
 public:
  CorrelationPool() = default;
  static CorrelationPool counting(int ell);

  int ell() const { return ell_; }
  Role role() const { return role_; }
  bool is_counting() const { return counting_; }

  // Everything handed out so far.
  const Budget& consumed() const { return consumed_; }
  // What a fresh pool held at deal time.
  const Budget& capacity() const { return capacity_; }

  TripleBatch take_triples(size_t n);
  AndBatch take_and(size_t n);
  MsbBatch take_msb(size_t n);
  TruncBatch take_trunc(size_t n, int shift);
  BitBatch take_bits(size_t n);
  MuxBatch take_mux(size_t n);
  MatTriple take_mat(size_t k, size_t m, size_t n);

  // Versioned little-endian cache file.
  void save(const std::string& path) const;
  static CorrelationPool load(const std::string& path);

  bool operator==(const CorrelationPool& o) const;

 private:
  friend class Dealer;
  friend struct PoolAccess;

  struct ArithQueue {
    std::vector<uint64_t> a, b, c;
  };
  struct TruncQueue {
    std::vector<uint64_t> r, r_hi, bits;
  };

  // Cursor bookkeeping shared by all take_* calls. Returns the start offset.
  uint64_t advance(const char* what, uint64_t& cursor, uint64_t have,
                   uint64_t want);

  int ell_ = 64;
  Role role_ = Role::kClient;
  bool counting_ = false;
  Budget capacity_;
  Budget consumed_;

  ArithQueue triples_;
  BitVec and_a_, and_b_, and_c_;
  std::vector<uint64_t> msb_r_, msb_bits_;
  BitVec bit_bool_;
  std::vector<uint64_t> bit_arith_;
  BitVec mux_bool_;
  std::vector<uint64_t> mux_rho_, mux_a_, mux_rho_a_;
  std::map<int, TruncQueue> trunc_;
  std::map<MatDims, std::vector<MatTriple>> mat_;
};

struct AuditReport {
  uint64_t checked = 0;
  uint64_t failed = 0;
  std::vector<std::string> failures;  // first few, for diagnostics
  bool ok() const { return failed == 0; }
};

// Trusted setup simulation. It produces both parties' pools from a seed and
// is not reachable from the online protocol code.
class Dealer {
 public:
  static std::pair<CorrelationPool, CorrelationPool> deal(const Budget& budget,
                                                          uint64_t seed,
                                                          int ell);
  // Reconstructs every correlation of a dealt pair and checks its relation.
  static AuditReport audit(const CorrelationPool& client,
                           const CorrelationPool& server);
};

// Test hook that lets negative tests corrupt a pool.
struct PoolAccess {
  static std::vector<uint64_t>& triple_c(CorrelationPool& p) {
    return p.triples_.c;
  }
  static BitVec& and_c(CorrelationPool& p) { return p.and_c_; }
};

}  // namespace secmoe
