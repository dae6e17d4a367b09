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
#include <span>
#include <utility>
#include <vector>

#include "secmoe/bitvec.h"
#include "secmoe/party.h"

namespace secmoe {

// One party's additive share of a flat tensor. frac counts the fractional
// bits of the shared value: 0 for raw integers and bits, s for encoded
// reals, 2s for an untruncated product.
struct ArithShare {
  std::vector<uint64_t> v;
  int frac = 0;

  ArithShare() = default;
  ArithShare(std::vector<uint64_t> values, int frac_bits)
      : v(std::move(values)), frac(frac_bits) {}
  size_t size() const { return v.size(); }
};

// One party's XOR share of a bit vector.
using BoolShare = BitVec;

// Ring elements travel as ceil(ell/8) little-endian bytes each.
std::vector<uint8_t> pack_ring(std::span<const uint64_t> v, int ell);
std::vector<uint64_t> unpack_ring(std::span<const uint8_t> bytes, size_t n,
                                  int ell);

// Splits x into (client, server) shares with the given client mask.
std::pair<std::vector<uint64_t>, std::vector<uint64_t>> split_with_mask(
    std::span<const uint64_t> x, std::span<const uint64_t> mask, int ell);
std::vector<uint64_t> reconstruct(std::span<const uint64_t> a,
                                  std::span<const uint64_t> b, int ell);

// The owner samples a uniform mask, keeps it, and sends x - mask to the peer.
// Non-owners pass values == nullptr.
ArithShare share_input(Party& p, Role owner,
                       const std::vector<uint64_t>* values, size_t n,
                       int frac);
BoolShare share_bits(Party& p, Role owner, const BitVec* bits, size_t n);

// Both parties learn the value.
std::vector<uint64_t> reveal(Party& p, const ArithShare& x);
// Only `to` learns the value; the other party gets an empty vector.
std::vector<uint64_t> reveal_to(Party& p, const ArithShare& x, Role to);
BitVec reveal_bits(Party& p, const BoolShare& x);

// --- local operations ------------------------------------------------------

ArithShare add(const Party& p, const ArithShare& a, const ArithShare& b);
ArithShare sub(const Party& p, const ArithShare& a, const ArithShare& b);
ArithShare neg(const Party& p, const ArithShare& a);
// Public addend at the same frac as a; only the client's share changes.
ArithShare add_public(const Party& p, const ArithShare& a,
                      std::span<const uint64_t> c);
ArithShare add_public(const Party& p, const ArithShare& a, uint64_t c);
// Elementwise product with a public vector (or scalar) holding c_frac bits.
ArithShare mul_public(const Party& p, const ArithShare& a,
                      std::span<const uint64_t> c, int c_frac);
ArithShare mul_public(const Party& p, const ArithShare& a, uint64_t c,
                      int c_frac);
BoolShare xor_public(const Party& p, const BoolShare& a, const BitVec& c);
BoolShare not_share(const Party& p, const BoolShare& a);

// --- interactive protocols -------------------------------------------------

// Ring product via Beaver triples; frac adds up.
ArithShare mul_ring(Party& p, const ArithShare& a, const ArithShare& b);
// Arithmetic right shift by `shift`. Leaves frac untouched, so callers
// decide whether the shift restores scale or divides the value.
ArithShare trunc(Party& p, const ArithShare& a, int shift);
// Shifts a back to frac == s, plus `extra` bits of division.
ArithShare rescale(Party& p, const ArithShare& a, int extra = 0);
// Fixed-point product: ring product then rescale.
ArithShare mul_fixed(Party& p, const ArithShare& a, const ArithShare& b);

// Most significant bit of the shared ring element.
BoolShare msb(Party& p, const ArithShare& a);
BoolShare and_bits(Party& p, const BoolShare& x, const BoolShare& y);

// Signed comparisons 1{x < t} against public ring thresholds, one result per
// threshold. Exact for every x in the ring.
std::vector<BoolShare> compare_lt(Party& p, const ArithShare& x,
                                  std::span<const uint64_t> thresholds);
BoolShare compare_lt(Party& p, const ArithShare& x, uint64_t threshold);

// 0/1 ring value (frac 0) of each shared bit.
ArithShare b2a(Party& p, const BoolShare& t);
// sel ? value : 0 for public values at frac `frac`.
ArithShare mux_public(Party& p, const BoolShare& sel,
                      std::span<const uint64_t> values, int frac);
// sel ? v : 0 for a shared v.
ArithShare mux(Party& p, const BoolShare& sel, const ArithShare& v);

// Batched share-by-share matrix products A_i (k x m) times B_i (m x n).
// Outputs carry frac(A) + frac(B).
std::vector<ArithShare> matmul_shared(Party& p,
                                      std::span<const ArithShare> a,
                                      std::span<const ArithShare> b, size_t k,
                                      size_t m, size_t n);

}  // namespace secmoe
