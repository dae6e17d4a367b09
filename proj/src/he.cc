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

#include "secmoe/he.h"

#include <bit>
#include <cmath>
#include <cstring>

namespace secmoe::he {

std::string_view engine_name(EngineKind kind) {
  switch (kind) {
    case EngineKind::kSemantic: return "semantic";
    case EngineKind::kRlwe: return "rlwe";
  }
  return "unknown";
}

EngineKind parse_engine(std::string_view name) {
  if (name == "semantic") return EngineKind::kSemantic;
  if (name == "rlwe") return EngineKind::kRlwe;
  SECMOE_THROW(ErrorCode::kInvalidConfig,
               "unknown HE engine '{}' (expected semantic|rlwe)", name);
}

void HeParams::validate() const {
  SECMOE_ENFORCE(ring_degree >= 2 && std::has_single_bit(ring_degree),
                 ErrorCode::kParameter, "ring degree {} is not a power of two",
                 ring_degree);
  SECMOE_ENFORCE(plain_bits >= 1 && plain_bits <= 64, ErrorCode::kParameter,
                 "plaintext modulus 2^{} out of range", plain_bits);
  SECMOE_ENFORCE(max_products >= 1, ErrorCode::kParameter,
                 "max_products must be positive");
  SECMOE_ENFORCE(response_scale > 0, ErrorCode::kParameter,
                 "response_scale must be positive");
}

std::vector<uint64_t> negacyclic_mul(std::span<const uint64_t> a,
                                     std::span<const uint64_t> b,
                                     uint64_t mask) {
  const size_t n = a.size();
  SECMOE_ENFORCE(b.size() == n, ErrorCode::kDimensionMismatch,
                 "polynomial degrees {} vs {}", a.size(), b.size());
  // Iterate over the sparser operand's support.
  size_t nza = 0, nzb = 0;
  for (size_t i = 0; i < n; ++i) {
    nza += a[i] != 0;
    nzb += b[i] != 0;
  }
  if (nzb > nza) std::swap(a, b);
  std::vector<uint64_t> out(n, 0);
  for (size_t i = 0; i < n; ++i) {
    const uint64_t bi = b[i];
    if (bi == 0) continue;
    // X^i * a: indices i..n-1 receive a[0..n-1-i], the rest wrap negated.
    uint64_t* o = out.data();
    const uint64_t* pa = a.data();
    for (size_t j = 0; j + i < n; ++j) o[j + i] += pa[j] * bi;
    for (size_t j = n - i; j < n; ++j) o[j + i - n] -= pa[j] * bi;
  }
  if (mask != ~uint64_t{0})
    for (auto& v : out) v &= mask;
  return out;
}

namespace {

void put_u16(uint8_t* p, uint16_t v) { std::memcpy(p, &v, 2); }
void put_u32(uint8_t* p, uint32_t v) { std::memcpy(p, &v, 4); }
void put_u64(uint8_t* p, uint64_t v) { std::memcpy(p, &v, 8); }
template <typename T>
T get(const uint8_t* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

// Centered lift of a plaintext coefficient in Z_t to a 64-bit word.
uint64_t centered(uint64_t v, int plain_bits) {
  if (plain_bits >= 64) return v;
  const uint64_t t = uint64_t{1} << plain_bits;
  return v >= t / 2 ? v - t : v;
}

uint64_t delta(int plain_bits) {
  return plain_bits >= 64 ? 1 : uint64_t{1} << (64 - plain_bits);
}

}  // namespace

std::vector<uint8_t> Ciphertext::serialize() const {
  std::vector<uint8_t> out(byte_size());
  const uint64_t payload = 2 * c0_.size() * 8;
  put_u16(out.data(), static_cast<uint16_t>(kind_));
  put_u16(out.data() + 2, static_cast<uint16_t>(level_));
  put_u32(out.data() + 4, static_cast<uint32_t>(c0_.size()));
  put_u64(out.data() + 8, payload);
  std::memcpy(out.data() + kCtHeaderBytes, c0_.data(), c0_.size() * 8);
  if (!c1_.empty())
    std::memcpy(out.data() + kCtHeaderBytes + c0_.size() * 8, c1_.data(),
                c1_.size() * 8);
  return out;
}

Ciphertext Ciphertext::deserialize(std::span<const uint8_t> bytes,
                                   const HeParams& params) {
  SECMOE_ENFORCE(bytes.size() >= kCtHeaderBytes, ErrorCode::kProtocol,
                 "ciphertext shorter than its header");
  const auto kind = static_cast<EngineKind>(get<uint16_t>(bytes.data()));
  const int level = get<uint16_t>(bytes.data() + 2);
  const size_t n = get<uint32_t>(bytes.data() + 4);
  const uint64_t payload = get<uint64_t>(bytes.data() + 8);
  SECMOE_ENFORCE(kind == params.kind && n == params.ring_degree &&
                     payload == 2 * n * 8 &&
                     bytes.size() == kCtHeaderBytes + payload && level <= 1,
                 ErrorCode::kProtocol,
                 "malformed ciphertext (engine {}, N {}, level {}, {} bytes)",
                 static_cast<int>(kind), n, level, bytes.size());
  Ciphertext ct;
  ct.kind_ = kind;
  ct.level_ = level;
  ct.c0_.resize(n);
  std::memcpy(ct.c0_.data(), bytes.data() + kCtHeaderBytes, n * 8);
  if (kind == EngineKind::kRlwe) {
    ct.c1_.resize(n);
    std::memcpy(ct.c1_.data(), bytes.data() + kCtHeaderBytes + n * 8, n * 8);
  }
  return ct;
}

// ---------------------------------------------------------------------------
// Keys

SecretKey::SecretKey(const HeParams& params, uint64_t seed)
    : params_(params), prg_(std::make_unique<Prg>(seed, 0x4845))  {}

SecretKey SecretKey::generate(const HeParams& params, uint64_t seed) {
  params.validate();
  SecretKey sk(params, seed);
  if (params.kind == EngineKind::kRlwe) {
    // Worst case after max_products ct x pt products, each with a centered
    // plaintext of magnitude at most t/2, plus fresh noise:
    //   (P + 1) * N * eta * t/2  <  delta/2.
    // A deterministic bound, so the failure probability is zero.
    constexpr double kEta = 2;
    const double t_half = std::ldexp(1.0, params.plain_bits - 1);
    const double bound = (static_cast<double>(params.max_products) + 1) *
                         static_cast<double>(params.ring_degree) * kEta *
                         t_half;
    const double half_delta = std::ldexp(1.0, 63 - params.plain_bits);
    SECMOE_ENFORCE(params.plain_bits < 64 && bound < half_delta,
                   ErrorCode::kParameter,
                   "rlwe noise audit failed: worst-case noise 2^{:.1f} exceeds "
                   "delta/2 = 2^{} for plaintext modulus 2^{}",
                   std::log2(bound), 63 - params.plain_bits, params.plain_bits);
    sk.s_.resize(params.ring_degree);
    for (auto& v : sk.s_) {
      // Uniform ternary via rejection on two bits.
      uint64_t r;
      do {
        r = sk.prg_->next_u64() & 3;
      } while (r == 3);
      v = r == 0 ? 0 : (r == 1 ? 1 : ~uint64_t{0});
    }
  }
  return sk;
}

Ciphertext SecretKey::encrypt(const Plaintext& pt) {
  SECMOE_ENFORCE(pt.degree() == params_.ring_degree,
                 ErrorCode::kDimensionMismatch,
                 "plaintext degree {} vs ring degree {}", pt.degree(),
                 params_.ring_degree);
  const uint64_t tmask = params_.plain_mask();
  Ciphertext ct;
  ct.kind_ = params_.kind;
  ct.level_ = 0;
  const size_t n = params_.ring_degree;
  if (params_.kind == EngineKind::kSemantic) {
    ct.c0_ = pt.coeffs;
    for (auto& v : ct.c0_) v &= tmask;
    return ct;
  }
  ct.c1_.resize(n);
  for (auto& v : ct.c1_) v = prg_->next_u64();
  ct.c0_ = negacyclic_mul(ct.c1_, s_, ~uint64_t{0});
  const uint64_t d = delta(params_.plain_bits);
  for (size_t i = 0; i < n; ++i) {
    // Centered binomial noise with eta = 2.
    const uint64_t r = prg_->next_u64();
    const int e = std::popcount(r & 3) - std::popcount((r >> 2) & 3);
    ct.c0_[i] += static_cast<uint64_t>(static_cast<int64_t>(e)) +
                 d * (pt.coeffs[i] & tmask);
  }
  return ct;
}

Plaintext SecretKey::decrypt(const Ciphertext& ct) const {
  SECMOE_ENFORCE(ct.kind_ == params_.kind && ct.degree() == params_.ring_degree,
                 ErrorCode::kProtocol, "ciphertext does not match key");
  const uint64_t tmask = params_.plain_mask();
  if (params_.kind == EngineKind::kSemantic) {
    Plaintext pt(ct.c0_);
    for (auto& v : pt.coeffs) v &= tmask;
    return pt;
  }
  std::vector<uint64_t> as = negacyclic_mul(ct.c1_, s_, ~uint64_t{0});
  Plaintext pt(params_.ring_degree);
  const int shift = 64 - params_.plain_bits;
  const uint64_t half = uint64_t{1} << (shift - 1);
  for (size_t i = 0; i < pt.degree(); ++i) {
    const uint64_t v = ct.c0_[i] - as[i];
    pt.coeffs[i] = ((v + half) >> shift) & tmask;
  }
  return pt;
}

// ---------------------------------------------------------------------------
// Evaluation

Engine::Engine(const HeParams& params) : params_(params) { params.validate(); }

void Engine::check(const Ciphertext& a) const {
  SECMOE_ENFORCE(a.kind_ == params_.kind && a.degree() == params_.ring_degree,
                 ErrorCode::kProtocol,
                 "ciphertext (engine {}, N {}) does not match engine {} N {}",
                 engine_name(a.kind_), a.degree(), engine_name(params_.kind),
                 params_.ring_degree);
}

void Engine::check(const Plaintext& p) const {
  SECMOE_ENFORCE(p.degree() == params_.ring_degree,
                 ErrorCode::kDimensionMismatch,
                 "plaintext degree {} vs ring degree {}", p.degree(),
                 params_.ring_degree);
}

Ciphertext Engine::zero() const {
  Ciphertext ct;
  ct.kind_ = params_.kind;
  ct.c0_.assign(params_.ring_degree, 0);
  if (params_.kind == EngineKind::kRlwe) ct.c1_.assign(params_.ring_degree, 0);
  return ct;
}

Ciphertext Engine::add(const Ciphertext& a, const Ciphertext& b) const {
  check(a);
  check(b);
  Ciphertext out = a;
  out.level_ = std::max(a.level_, b.level_);
  const uint64_t m = params_.kind == EngineKind::kSemantic
                         ? params_.plain_mask()
                         : ~uint64_t{0};
  for (size_t i = 0; i < out.c0_.size(); ++i)
    out.c0_[i] = (out.c0_[i] + b.c0_[i]) & m;
  for (size_t i = 0; i < out.c1_.size(); ++i) out.c1_[i] += b.c1_[i];
  return out;
}

Ciphertext Engine::add_plain(const Ciphertext& a, const Plaintext& p) const {
  check(a);
  check(p);
  Ciphertext out = a;
  const uint64_t tmask = params_.plain_mask();
  if (params_.kind == EngineKind::kSemantic) {
    for (size_t i = 0; i < p.degree(); ++i)
      out.c0_[i] = (out.c0_[i] + p.coeffs[i]) & tmask;
  } else {
    const uint64_t d = delta(params_.plain_bits);
    for (size_t i = 0; i < p.degree(); ++i)
      out.c0_[i] += d * (p.coeffs[i] & tmask);
  }
  return out;
}

Ciphertext Engine::mul_plain(const Ciphertext& a, const Plaintext& p) const {
  check(a);
  check(p);
  Ciphertext out;
  out.kind_ = a.kind_;
  out.level_ = a.level_;
  if (params_.kind == EngineKind::kSemantic) {
    out.c0_ = negacyclic_mul(a.c0_, p.coeffs, params_.plain_mask());
    return out;
  }
  std::vector<uint64_t> lifted(p.coeffs.size());
  const uint64_t tmask = params_.plain_mask();
  for (size_t i = 0; i < lifted.size(); ++i)
    lifted[i] = centered(p.coeffs[i] & tmask, params_.plain_bits);
  out.c0_ = negacyclic_mul(a.c0_, lifted, ~uint64_t{0});
  out.c1_ = negacyclic_mul(a.c1_, lifted, ~uint64_t{0});
  return out;
}

Ciphertext Engine::mul(const Ciphertext& a, const Ciphertext& b) const {
  check(a);
  check(b);
  SECMOE_ENFORCE(params_.kind == EngineKind::kSemantic,
                 ErrorCode::kEngineUnsupported,
                 "ciphertext-ciphertext product needs the semantic engine");
  SECMOE_ENFORCE(a.level_ == 0 && b.level_ == 0, ErrorCode::kLevelExceeded,
                 "ciphertext product of levels {} and {} exceeds depth 1",
                 a.level_, b.level_);
  Ciphertext out;
  out.kind_ = a.kind_;
  out.level_ = 1;
  out.c0_ = negacyclic_mul(a.c0_, b.c0_, params_.plain_mask());
  return out;
}

Ciphertext Engine::mul_coeff_plain(const Ciphertext& a, size_t idx,
                                   const Plaintext& p) const {
  check(a);
  check(p);
  SECMOE_ENFORCE(params_.kind == EngineKind::kSemantic,
                 ErrorCode::kEngineUnsupported,
                 "coefficient selection needs the semantic engine");
  SECMOE_ENFORCE(idx < a.degree(), ErrorCode::kDimensionMismatch,
                 "coefficient {} of degree-{} ciphertext", idx, a.degree());
  Ciphertext out;
  out.kind_ = a.kind_;
  out.level_ = a.level_;
  const uint64_t s = a.c0_[idx];
  const uint64_t tmask = params_.plain_mask();
  out.c0_.resize(p.degree());
  for (size_t i = 0; i < p.degree(); ++i) out.c0_[i] = (s * p.coeffs[i]) & tmask;
  return out;
}

}  // namespace secmoe::he
