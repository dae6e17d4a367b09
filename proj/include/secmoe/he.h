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

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "secmoe/common.h"
#include "secmoe/prg.h"

namespace secmoe::he {

enum class EngineKind : uint16_t { kSemantic = 1, kRlwe = 2 };

std::string_view engine_name(EngineKind kind);
EngineKind parse_engine(std::string_view name);

inline constexpr size_t kCtHeaderBytes = 16;

struct HeParams {
  size_t ring_degree = 4096;
  int plain_bits = 64;  // plaintext modulus 2^plain_bits
  EngineKind kind = EngineKind::kSemantic;
  // Number of ct x pt products an rlwe ciphertext may accumulate; sizes the
  // noise audit.
  size_t max_products = 8;
  // What-if factor applied to response ciphertexts in reports only.
  double response_scale = 1.0;

  void validate() const;
  uint64_t plain_mask() const {
    return plain_bits >= 64 ? ~uint64_t{0}
                            : (uint64_t{1} << plain_bits) - 1;
  }
  // Serialized ciphertext size: header plus two degree-N polynomials of
  // 64-bit words.
  size_t ct_bytes() const { return kCtHeaderBytes + 2 * ring_degree * 8; }
};

// Element of Z_{2^plain_bits}[X]/(X^N + 1).
struct Plaintext {
  std::vector<uint64_t> coeffs;

  Plaintext() = default;
  explicit Plaintext(size_t n) : coeffs(n, 0) {}
  explicit Plaintext(std::vector<uint64_t> c) : coeffs(std::move(c)) {}
  size_t degree() const { return coeffs.size(); }
  bool operator==(const Plaintext&) const = default;
};

// Negacyclic product in Z_{2^64}[X]/(X^N+1), reduced by mask. Zero
// coefficients of either operand are skipped.
std::vector<uint64_t> negacyclic_mul(std::span<const uint64_t> a,
                                     std::span<const uint64_t> b,
                                     uint64_t mask);

class SecretKey;
class Engine;

class Ciphertext {
 public:
  Ciphertext() = default;

  EngineKind kind() const { return kind_; }
  int level() const { return level_; }
  size_t degree() const { return c0_.size(); }
  size_t byte_size() const { return kCtHeaderBytes + 2 * c0_.size() * 8; }

  std::vector<uint8_t> serialize() const;
  static Ciphertext deserialize(std::span<const uint8_t> bytes,
                                const HeParams& params);

  bool operator==(const Ciphertext&) const = default;

 private:
  friend class SecretKey;
  friend class Engine;

  EngineKind kind_ = EngineKind::kSemantic;
  int level_ = 0;
  // Semantic engine: c0 is the message polynomial, c1 stays zero and only
  // pads the wire size. RLWE engine: (c0, c1) = (a*s + e + delta*m, a).
  std::vector<uint64_t> c0_;
  std::vector<uint64_t> c1_;
};

// Held by the client only; the sole path from a ciphertext back to data.
class SecretKey {
 public:
  // For the rlwe engine this runs the noise-budget audit and throws
  // kParameter when decryption could fail.
  static SecretKey generate(const HeParams& params, uint64_t seed);

  const HeParams& params() const { return params_; }
  Ciphertext encrypt(const Plaintext& pt);
  Plaintext decrypt(const Ciphertext& ct) const;

 private:
  explicit SecretKey(const HeParams& params, uint64_t seed);

  HeParams params_;
  std::vector<uint64_t> s_;  // ternary secret stored as ring words
  std::unique_ptr<Prg> prg_;
};

// Public evaluation operations. Stateless given the parameters.
class Engine {
 public:
  explicit Engine(const HeParams& params);
  const HeParams& params() const { return params_; }

  // Encryption of zero with no noise; an accumulator seed.
  Ciphertext zero() const;
  Ciphertext add(const Ciphertext& a, const Ciphertext& b) const;
  Ciphertext add_plain(const Ciphertext& a, const Plaintext& p) const;
  Ciphertext mul_plain(const Ciphertext& a, const Plaintext& p) const;
  // Depth-1 product; semantic engine only.
  Ciphertext mul(const Ciphertext& a, const Ciphertext& b) const;
  // Encrypted coefficient idx of a, times the plaintext polynomial p.
  // Semantic engine only.
  Ciphertext mul_coeff_plain(const Ciphertext& a, size_t idx,
                             const Plaintext& p) const;

 private:
  void check(const Ciphertext& a) const;
  void check(const Plaintext& p) const;

  HeParams params_;
};

}  // namespace secmoe::he
