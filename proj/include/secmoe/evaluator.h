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
#include <vector>

#include "secmoe/bitvec.h"
#include "secmoe/party.h"
#include "secmoe/ring.h"
#include "secmoe/sharing.h"

namespace secmoe {

// Arithmetic on flat ring vectors that is either plaintext or secret shared.
// Algorithms written against this interface run unchanged in both worlds;
// with exact truncation the two reconstruct to identical ring values.
//
// A PlainEvaluator stores the values themselves in ArithShare::v and BitVec.
class Evaluator {
 public:
  virtual ~Evaluator() = default;

  virtual const FixedConfig& cfg() const = 0;
  virtual OpCounters& counters() = 0;

  uint64_t mask() const { return cfg().mask(); }
  int scale() const { return cfg().scale; }
  uint64_t enc(double v) const { return encode(v, cfg()); }

  // --- local --------------------------------------------------------------
  virtual ArithShare add(const ArithShare& a, const ArithShare& b) = 0;
  virtual ArithShare sub(const ArithShare& a, const ArithShare& b) = 0;
  virtual ArithShare add_public(const ArithShare& a,
                                std::span<const uint64_t> c) = 0;
  virtual ArithShare add_public(const ArithShare& a, uint64_t c) = 0;
  virtual ArithShare mul_public(const ArithShare& a,
                                std::span<const uint64_t> c, int c_frac) = 0;
  virtual ArithShare mul_public(const ArithShare& a, uint64_t c,
                                int c_frac) = 0;
  virtual BitVec not_bits(const BitVec& a) = 0;
  BitVec xor_bits(const BitVec& a, const BitVec& b) { return a ^ b; }
  // A public bit vector as a sharing.
  virtual BitVec public_bits(size_t n, bool value) = 0;
  // A value known to `owner` as a sharing; the other party holds zeros.
  virtual ArithShare owned(Role owner, const std::vector<uint64_t>& values,
                           int frac) = 0;

  // --- interactive --------------------------------------------------------
  virtual ArithShare input(Role owner, const std::vector<uint64_t>* values,
                           size_t n, int frac) = 0;
  virtual ArithShare mul(const ArithShare& a, const ArithShare& b) = 0;
  virtual ArithShare trunc(const ArithShare& a, int shift) = 0;
  virtual BitVec msb(const ArithShare& a) = 0;
  virtual BitVec and_bits(const BitVec& x, const BitVec& y) = 0;
  virtual ArithShare b2a(const BitVec& t) = 0;
  virtual ArithShare mux_public(const BitVec& sel,
                                std::span<const uint64_t> values,
                                int frac) = 0;
  virtual ArithShare mux(const BitVec& sel, const ArithShare& v) = 0;
  // Signed 1{x < t_j} for every public threshold t_j.
  virtual std::vector<BitVec> less_than(
      const ArithShare& x, std::span<const uint64_t> thresholds) = 0;
  // Batched A_i (k x m) times B_i (m x n); frac adds up.
  virtual std::vector<ArithShare> matmul(std::span<const ArithShare> a,
                                         std::span<const ArithShare> b,
                                         size_t k, size_t m, size_t n) = 0;
  virtual std::vector<uint64_t> reveal(const ArithShare& a) = 0;

  // --- derived ------------------------------------------------------------
  // Shifts back to frac == scale, plus `extra` bits of division.
  ArithShare rescale(const ArithShare& a, int extra = 0);
  ArithShare mul_fx(const ArithShare& a, const ArithShare& b) {
    return rescale(mul(a, b));
  }
};

class PlainEvaluator final : public Evaluator {
 public:
  explicit PlainEvaluator(FixedConfig cfg);

  const FixedConfig& cfg() const override { return cfg_; }
  OpCounters& counters() override { return counters_; }

  ArithShare add(const ArithShare& a, const ArithShare& b) override;
  ArithShare sub(const ArithShare& a, const ArithShare& b) override;
  ArithShare add_public(const ArithShare& a,
                        std::span<const uint64_t> c) override;
  ArithShare add_public(const ArithShare& a, uint64_t c) override;
  ArithShare mul_public(const ArithShare& a, std::span<const uint64_t> c,
                        int c_frac) override;
  ArithShare mul_public(const ArithShare& a, uint64_t c, int c_frac) override;
  BitVec not_bits(const BitVec& a) override { return ~a; }
  BitVec public_bits(size_t n, bool value) override {
    return BitVec(n, value);
  }
  ArithShare owned(Role, const std::vector<uint64_t>& values,
                   int frac) override {
    return {values, frac};
  }

  ArithShare input(Role owner, const std::vector<uint64_t>* values, size_t n,
                   int frac) override;
  ArithShare mul(const ArithShare& a, const ArithShare& b) override;
  ArithShare trunc(const ArithShare& a, int shift) override;
  BitVec msb(const ArithShare& a) override;
  BitVec and_bits(const BitVec& x, const BitVec& y) override;
  ArithShare b2a(const BitVec& t) override;
  ArithShare mux_public(const BitVec& sel, std::span<const uint64_t> values,
                        int frac) override;
  ArithShare mux(const BitVec& sel, const ArithShare& v) override;
  std::vector<BitVec> less_than(const ArithShare& x,
                                std::span<const uint64_t> thresholds) override;
  std::vector<ArithShare> matmul(std::span<const ArithShare> a,
                                 std::span<const ArithShare> b, size_t k,
                                 size_t m, size_t n) override;
  std::vector<uint64_t> reveal(const ArithShare& a) override { return a.v; }

 private:
  FixedConfig cfg_;
  OpCounters counters_;
};

class SecureEvaluator final : public Evaluator {
 public:
  explicit SecureEvaluator(Party& party) : p_(party) {}

  Party& party() { return p_; }
  const FixedConfig& cfg() const override { return p_.cfg(); }
  OpCounters& counters() override { return p_.counters(); }

  ArithShare add(const ArithShare& a, const ArithShare& b) override {
    return secmoe::add(p_, a, b);
  }
  ArithShare sub(const ArithShare& a, const ArithShare& b) override {
    return secmoe::sub(p_, a, b);
  }
  ArithShare add_public(const ArithShare& a,
                        std::span<const uint64_t> c) override {
    return secmoe::add_public(p_, a, c);
  }
  ArithShare add_public(const ArithShare& a, uint64_t c) override {
    return secmoe::add_public(p_, a, c);
  }
  ArithShare mul_public(const ArithShare& a, std::span<const uint64_t> c,
                        int c_frac) override {
    return secmoe::mul_public(p_, a, c, c_frac);
  }
  ArithShare mul_public(const ArithShare& a, uint64_t c, int c_frac) override {
    return secmoe::mul_public(p_, a, c, c_frac);
  }
  BitVec not_bits(const BitVec& a) override { return not_share(p_, a); }
  BitVec public_bits(size_t n, bool value) override {
    return BitVec(n, value && p_.is_client());
  }
  ArithShare owned(Role owner, const std::vector<uint64_t>& values,
                   int frac) override {
    if (p_.role() == owner) return {values, frac};
    return {std::vector<uint64_t>(values.size(), 0), frac};
  }

  ArithShare input(Role owner, const std::vector<uint64_t>* values, size_t n,
                   int frac) override {
    return share_input(p_, owner, values, n, frac);
  }
  ArithShare mul(const ArithShare& a, const ArithShare& b) override {
    return mul_ring(p_, a, b);
  }
  ArithShare trunc(const ArithShare& a, int shift) override {
    return secmoe::trunc(p_, a, shift);
  }
  BitVec msb(const ArithShare& a) override { return secmoe::msb(p_, a); }
  BitVec and_bits(const BitVec& x, const BitVec& y) override {
    return secmoe::and_bits(p_, x, y);
  }
  ArithShare b2a(const BitVec& t) override { return secmoe::b2a(p_, t); }
  ArithShare mux_public(const BitVec& sel, std::span<const uint64_t> values,
                        int frac) override {
    return secmoe::mux_public(p_, sel, values, frac);
  }
  ArithShare mux(const BitVec& sel, const ArithShare& v) override {
    return secmoe::mux(p_, sel, v);
  }
  std::vector<BitVec> less_than(const ArithShare& x,
                                std::span<const uint64_t> thresholds) override {
    return compare_lt(p_, x, thresholds);
  }
  std::vector<ArithShare> matmul(std::span<const ArithShare> a,
                                 std::span<const ArithShare> b, size_t k,
                                 size_t m, size_t n) override {
    return matmul_shared(p_, a, b, k, m, n);
  }
  std::vector<uint64_t> reveal(const ArithShare& a) override {
    return secmoe::reveal(p_, a);
  }

 private:
  Party& p_;
};

// --- layout helpers shared by the layer algorithms -------------------------

// Concatenation and slicing of flat vectors with a common frac.
ArithShare concat(std::span<const ArithShare> parts);
ArithShare slice(const ArithShare& a, size_t begin, size_t len);
// Each of the `rows` values repeated `cols` times.
ArithShare broadcast_rows(const ArithShare& a, size_t cols);
BitVec broadcast_bits(const BitVec& a, size_t cols);
// Row sums of a rows x cols matrix.
ArithShare row_sums(const ArithShare& a, size_t rows, size_t cols);
// Transpose of a rows x cols matrix.
ArithShare transpose(const ArithShare& a, size_t rows, size_t cols);
// Columns [begin, begin + len) of a rows x cols matrix.
ArithShare col_block(const ArithShare& a, size_t rows, size_t cols,
                     size_t begin, size_t len);

}  // namespace secmoe
