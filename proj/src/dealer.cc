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

#include "secmoe/dealer.h"

#include <bit>
#include <cstring>
#include <fstream>

#include "fmt/format.h"
#include "secmoe/prg.h"
#include "secmoe/ring.h"

namespace secmoe {

static_assert(std::endian::native == std::endian::little,
              "pool files are written in host order");

// ---------------------------------------------------------------------------
// Budget

bool Budget::empty() const {
  if (triples || and_bits || msb_masks || bit_corrs || mux_corrs) return false;
  for (const auto& [k, v] : trunc_masks)
    if (v) return false;
  for (const auto& [k, v] : mat_triples)
    if (v) return false;
  return true;
}

Budget& Budget::operator+=(const Budget& o) {
  triples += o.triples;
  and_bits += o.and_bits;
  msb_masks += o.msb_masks;
  bit_corrs += o.bit_corrs;
  mux_corrs += o.mux_corrs;
  for (const auto& [k, v] : o.trunc_masks) trunc_masks[k] += v;
  for (const auto& [k, v] : o.mat_triples) mat_triples[k] += v;
  return *this;
}

uint64_t Budget::setup_bytes(int ell) const {
  const uint64_t w = (static_cast<uint64_t>(ell) + 7) / 8;
  uint64_t words = 3 * triples + 2 * msb_masks + bit_corrs + 3 * mux_corrs;
  uint64_t bits = 3 * and_bits + bit_corrs + mux_corrs;
  for (const auto& [k, v] : trunc_masks) words += 3 * v;
  for (const auto& [d, v] : mat_triples)
    words += v * (d[0] * d[1] + d[1] * d[2] + d[0] * d[2]);
  return 2 * (words * w + (bits + 7) / 8);
}

std::string Budget::to_string() const {
  std::string s = fmt::format(
      "triples={} and_bits={} msb={} bits={} mux={}", triples, and_bits,
      msb_masks, bit_corrs, mux_corrs);
  for (const auto& [k, v] : trunc_masks) s += fmt::format(" trunc[{}]={}", k, v);
  for (const auto& [d, v] : mat_triples)
    s += fmt::format(" mat[{}x{}x{}]={}", d[0], d[1], d[2], v);
  return s;
}

// ---------------------------------------------------------------------------
// Pool consumption

CorrelationPool CorrelationPool::counting(int ell) {
  CorrelationPool p;
  p.ell_ = ell;
  p.counting_ = true;
  return p;
}

uint64_t CorrelationPool::advance(const char* what, uint64_t& cursor,
                                  uint64_t have, uint64_t want) {
  if (!counting_) {
    SECMOE_ENFORCE(cursor + want <= have, ErrorCode::kRandomnessExhausted,
                   "{} pool exhausted: {} used of {}, {} more requested",
                   what, cursor, have, want);
  }
  const uint64_t start = cursor;
  cursor += want;
  return start;
}

namespace {

std::vector<uint64_t> take_words(const std::vector<uint64_t>& src,
                                 uint64_t start, size_t n, bool counting) {
  if (counting) return std::vector<uint64_t>(n, 0);
  return {src.begin() + start, src.begin() + start + n};
}

BitVec take_bits_from(const BitVec& src, uint64_t start, size_t n,
                      bool counting) {
  if (counting) return BitVec(n);
  return src.slice(start, n);
}

}  // namespace

TripleBatch CorrelationPool::take_triples(size_t n) {
  uint64_t s = advance("triple", consumed_.triples, capacity_.triples, n);
  return {take_words(triples_.a, s, n, counting_),
          take_words(triples_.b, s, n, counting_),
          take_words(triples_.c, s, n, counting_)};
}

AndBatch CorrelationPool::take_and(size_t n) {
  uint64_t s = advance("and-triple", consumed_.and_bits, capacity_.and_bits, n);
  return {take_bits_from(and_a_, s, n, counting_),
          take_bits_from(and_b_, s, n, counting_),
          take_bits_from(and_c_, s, n, counting_)};
}

MsbBatch CorrelationPool::take_msb(size_t n) {
  uint64_t s = advance("msb-mask", consumed_.msb_masks, capacity_.msb_masks, n);
  return {take_words(msb_r_, s, n, counting_),
          take_words(msb_bits_, s, n, counting_)};
}

TruncBatch CorrelationPool::take_trunc(size_t n, int shift) {
  uint64_t have = 0;
  if (auto it = capacity_.trunc_masks.find(shift);
      it != capacity_.trunc_masks.end())
    have = it->second;
  uint64_t& cursor = consumed_.trunc_masks[shift];
  uint64_t s = advance("trunc-mask", cursor, have, n);
  if (counting_) return {std::vector<uint64_t>(n), std::vector<uint64_t>(n),
                         std::vector<uint64_t>(n)};
  const auto& q = trunc_.at(shift);
  return {take_words(q.r, s, n, false), take_words(q.r_hi, s, n, false),
          take_words(q.bits, s, n, false)};
}

BitBatch CorrelationPool::take_bits(size_t n) {
  uint64_t s = advance("bit", consumed_.bit_corrs, capacity_.bit_corrs, n);
  return {take_bits_from(bit_bool_, s, n, counting_),
          take_words(bit_arith_, s, n, counting_)};
}

MuxBatch CorrelationPool::take_mux(size_t n) {
  uint64_t s = advance("mux", consumed_.mux_corrs, capacity_.mux_corrs, n);
  return {take_bits_from(mux_bool_, s, n, counting_),
          take_words(mux_rho_, s, n, counting_),
          take_words(mux_a_, s, n, counting_),
          take_words(mux_rho_a_, s, n, counting_)};
}

MatTriple CorrelationPool::take_mat(size_t k, size_t m, size_t n) {
  const MatDims dims{k, m, n};
  uint64_t have = 0;
  if (auto it = capacity_.mat_triples.find(dims);
      it != capacity_.mat_triples.end())
    have = it->second;
  uint64_t& cursor = consumed_.mat_triples[dims];
  uint64_t s = advance("matrix-triple", cursor, have, 1);
  if (counting_) {
    return {std::vector<uint64_t>(k * m), std::vector<uint64_t>(m * n),
            std::vector<uint64_t>(k * n)};
  }
  return mat_.at(dims)[s];
}

bool CorrelationPool::operator==(const CorrelationPool& o) const {
  auto same_mat = [&] {
    if (mat_.size() != o.mat_.size()) return false;
    for (const auto& [d, v] : mat_) {
      auto it = o.mat_.find(d);
      if (it == o.mat_.end() || it->second.size() != v.size()) return false;
      for (size_t i = 0; i < v.size(); ++i) {
        const auto& x = v[i];
        const auto& y = it->second[i];
        if (x.a != y.a || x.b != y.b || x.c != y.c) return false;
      }
    }
    return true;
  };
  auto same_trunc = [&] {
    if (trunc_.size() != o.trunc_.size()) return false;
    for (const auto& [s, q] : trunc_) {
      auto it = o.trunc_.find(s);
      if (it == o.trunc_.end()) return false;
      if (q.r != it->second.r || q.r_hi != it->second.r_hi ||
          q.bits != it->second.bits)
        return false;
    }
    return true;
  };
  return ell_ == o.ell_ && role_ == o.role_ && counting_ == o.counting_ &&
         capacity_ == o.capacity_ && consumed_ == o.consumed_ &&
         triples_.a == o.triples_.a && triples_.b == o.triples_.b &&
         triples_.c == o.triples_.c && and_a_ == o.and_a_ &&
         and_b_ == o.and_b_ && and_c_ == o.and_c_ && msb_r_ == o.msb_r_ &&
         msb_bits_ == o.msb_bits_ && bit_bool_ == o.bit_bool_ &&
         bit_arith_ == o.bit_arith_ && mux_bool_ == o.mux_bool_ &&
         mux_rho_ == o.mux_rho_ && mux_a_ == o.mux_a_ &&
         mux_rho_a_ == o.mux_rho_a_ && same_trunc() && same_mat();
}

// ---------------------------------------------------------------------------
// Dealing

namespace {

enum Stream : uint64_t {
  kTripleStream = 1,
  kAndStream,
  kMsbStream,
  kTruncStream,
  kBitStream,
  kMuxStream,
  kMatStream,
};

// Random bit vector of n bits from whole PRG words.
BitVec random_bits(Prg& prg, size_t n) {
  std::vector<uint64_t> w((n + 63) / 64);
  for (auto& x : w) x = prg.next_u64();
  return BitVec::from_words(std::move(w), n);
}

// Splits value v into (client, server) with a fresh uniform client part.
std::pair<uint64_t, uint64_t> split(uint64_t v, Prg& prg, uint64_t mask) {
  const uint64_t c = prg.next_u64() & mask;
  return {c, (v - c) & mask};
}

void split_into(uint64_t v, Prg& prg, uint64_t mask, std::vector<uint64_t>& c,
                std::vector<uint64_t>& s) {
  auto [x, y] = split(v, prg, mask);
  c.push_back(x);
  s.push_back(y);
}

// Boolean sharing of a random bit vector r: returns the client share and
// overwrites r with the server share.
BitVec split_bits(BitVec& r, Prg& prg) {
  BitVec c = random_bits(prg, r.size());
  r ^= c;
  return c;
}

}  // namespace

std::pair<CorrelationPool, CorrelationPool> Dealer::deal(const Budget& budget,
                                                         uint64_t seed,
                                                         int ell) {
  FixedConfig{ell, 1}.validate();
  const uint64_t mask = ring_mask(ell);
  CorrelationPool pc, ps;
  pc.ell_ = ps.ell_ = ell;
  pc.role_ = Role::kClient;
  ps.role_ = Role::kServer;
  pc.capacity_ = ps.capacity_ = budget;

  {
    Prg prg(seed, kTripleStream);
    auto& c = pc.triples_;
    auto& s = ps.triples_;
    for (auto* v : {&c.a, &c.b, &c.c, &s.a, &s.b, &s.c})
      v->reserve(budget.triples);
    for (uint64_t i = 0; i < budget.triples; ++i) {
      const uint64_t a = prg.next_u64() & mask;
      const uint64_t b = prg.next_u64() & mask;
      split_into(a, prg, mask, c.a, s.a);
      split_into(b, prg, mask, c.b, s.b);
      split_into(a * b, prg, mask, c.c, s.c);
    }
  }
  {
    Prg prg(seed, kAndStream);
    const size_t n = budget.and_bits;
    BitVec a = random_bits(prg, n);
    BitVec b = random_bits(prg, n);
    BitVec c = a & b;
    pc.and_a_ = split_bits(a, prg);
    pc.and_b_ = split_bits(b, prg);
    pc.and_c_ = split_bits(c, prg);
    ps.and_a_ = std::move(a);
    ps.and_b_ = std::move(b);
    ps.and_c_ = std::move(c);
  }
  {
    Prg prg(seed, kMsbStream);
    for (uint64_t i = 0; i < budget.msb_masks; ++i) {
      const uint64_t r = prg.next_u64() & mask;
      split_into(r, prg, mask, pc.msb_r_, ps.msb_r_);
      const uint64_t bc = prg.next_u64() & mask;
      pc.msb_bits_.push_back(bc);
      ps.msb_bits_.push_back(bc ^ r);
    }
  }
  {
    Prg prg(seed, kTruncStream);
    for (const auto& [shift, count] : budget.trunc_masks) {
      SECMOE_ENFORCE(shift > 0 && shift < ell, ErrorCode::kInvalidConfig,
                     "trunc shift {} for ring width {}", shift, ell);
      auto& qc = pc.trunc_[shift];
      auto& qs = ps.trunc_[shift];
      for (uint64_t i = 0; i < count; ++i) {
        const uint64_t r = prg.next_u64() & mask;
        split_into(r, prg, mask, qc.r, qs.r);
        split_into(r >> shift, prg, mask, qc.r_hi, qs.r_hi);
        const uint64_t bc = prg.next_u64() & mask;
        qc.bits.push_back(bc);
        qs.bits.push_back(bc ^ r);
      }
    }
  }
  {
    Prg prg(seed, kBitStream);
    BitVec rho = random_bits(prg, budget.bit_corrs);
    for (uint64_t i = 0; i < budget.bit_corrs; ++i)
      split_into(rho.get(i), prg, mask, pc.bit_arith_, ps.bit_arith_);
    pc.bit_bool_ = split_bits(rho, prg);
    ps.bit_bool_ = std::move(rho);
  }
  {
    Prg prg(seed, kMuxStream);
    BitVec rho = random_bits(prg, budget.mux_corrs);
    for (uint64_t i = 0; i < budget.mux_corrs; ++i) {
      const uint64_t bit = rho.get(i);
      const uint64_t a = prg.next_u64() & mask;
      split_into(bit, prg, mask, pc.mux_rho_, ps.mux_rho_);
      split_into(a, prg, mask, pc.mux_a_, ps.mux_a_);
      split_into(bit * a, prg, mask, pc.mux_rho_a_, ps.mux_rho_a_);
    }
    pc.mux_bool_ = split_bits(rho, prg);
    ps.mux_bool_ = std::move(rho);
  }
  {
    Prg prg(seed, kMatStream);
    for (const auto& [dims, count] : budget.mat_triples) {
      const size_t k = dims[0], m = dims[1], n = dims[2];
      auto& vc = pc.mat_[dims];
      auto& vs = ps.mat_[dims];
      for (uint64_t t = 0; t < count; ++t) {
        std::vector<uint64_t> a(k * m), b(m * n), c(k * n, 0);
        for (auto& x : a) x = prg.next_u64() & mask;
        for (auto& x : b) x = prg.next_u64() & mask;
        for (size_t i = 0; i < k; ++i)
          for (size_t l = 0; l < m; ++l)
            for (size_t j = 0; j < n; ++j) c[i * n + j] += a[i * m + l] * b[l * n + j];
        MatTriple tc, ts;
        for (auto x : a) split_into(x, prg, mask, tc.a, ts.a);
        for (auto x : b) split_into(x, prg, mask, tc.b, ts.b);
        for (auto x : c) split_into(x, prg, mask, tc.c, ts.c);
        vc.push_back(std::move(tc));
        vs.push_back(std::move(ts));
      }
    }
  }
  return {std::move(pc), std::move(ps)};
}

AuditReport Dealer::audit(const CorrelationPool& c, const CorrelationPool& s) {
  AuditReport rep;
  const uint64_t mask = ring_mask(c.ell_);
  auto check = [&]<typename... A>(bool ok, fmt::format_string<A...> f,
                                   A&&... args) {
    ++rep.checked;
    if (!ok) {
      ++rep.failed;
      if (rep.failures.size() < 8)
        rep.failures.push_back(fmt::format(f, std::forward<A>(args)...));
    }
  };
  auto add = [&](uint64_t x, uint64_t y) { return (x + y) & mask; };

  check(c.ell_ == s.ell_ && c.capacity_ == s.capacity_ &&
            c.role_ == Role::kClient && s.role_ == Role::kServer,
        "pool headers disagree");
  if (rep.failed) return rep;
  const Budget& b = c.capacity_;

  for (uint64_t i = 0; i < b.triples; ++i) {
    const uint64_t a = add(c.triples_.a[i], s.triples_.a[i]);
    const uint64_t bb = add(c.triples_.b[i], s.triples_.b[i]);
    check(add(c.triples_.c[i], s.triples_.c[i]) == ((a * bb) & mask),
          "triple {}: c != a*b", i);
  }
  {
    BitVec a = c.and_a_ ^ s.and_a_;
    BitVec bb = c.and_b_ ^ s.and_b_;
    BitVec cc = c.and_c_ ^ s.and_c_;
    BitVec bad = cc ^ (a & bb);
    const size_t nbad = bad.popcount();
    rep.checked += b.and_bits;
    if (nbad) {
      rep.failed += nbad;
      rep.failures.push_back(fmt::format("{} and-triples violate c = a&b", nbad));
    }
  }
  for (uint64_t i = 0; i < b.msb_masks; ++i) {
    const uint64_t r = add(c.msb_r_[i], s.msb_r_[i]);
    check(((c.msb_bits_[i] ^ s.msb_bits_[i]) & mask) == r,
          "msb mask {}: bit shares disagree with r", i);
  }
  for (const auto& [shift, count] : b.trunc_masks) {
    const auto& qc = c.trunc_.at(shift);
    const auto& qs = s.trunc_.at(shift);
    for (uint64_t i = 0; i < count; ++i) {
      const uint64_t r = add(qc.r[i], qs.r[i]);
      check(add(qc.r_hi[i], qs.r_hi[i]) == (r >> shift) &&
                ((qc.bits[i] ^ qs.bits[i]) & mask) == r,
            "trunc mask {} (shift {}) inconsistent", i, shift);
    }
  }
  for (uint64_t i = 0; i < b.bit_corrs; ++i) {
    const uint64_t rho = c.bit_bool_.get(i) ^ s.bit_bool_.get(i);
    check(add(c.bit_arith_[i], s.bit_arith_[i]) == rho,
          "bit correlation {} inconsistent", i);
  }
  for (uint64_t i = 0; i < b.mux_corrs; ++i) {
    const uint64_t rho = c.mux_bool_.get(i) ^ s.mux_bool_.get(i);
    const uint64_t a = add(c.mux_a_[i], s.mux_a_[i]);
    check(add(c.mux_rho_[i], s.mux_rho_[i]) == rho &&
              add(c.mux_rho_a_[i], s.mux_rho_a_[i]) == ((rho * a) & mask),
          "mux correlation {} inconsistent", i);
  }
  for (const auto& [dims, count] : b.mat_triples) {
    const size_t k = dims[0], m = dims[1], n = dims[2];
    for (uint64_t t = 0; t < count; ++t) {
      const auto& x = c.mat_.at(dims)[t];
      const auto& y = s.mat_.at(dims)[t];
      bool ok = true;
      for (size_t i = 0; i < k && ok; ++i)
        for (size_t j = 0; j < n; ++j) {
          uint64_t acc = 0;
          for (size_t l = 0; l < m; ++l)
            acc += add(x.a[i * m + l], y.a[i * m + l]) *
                   add(x.b[l * n + j], y.b[l * n + j]);
          if ((acc & mask) != add(x.c[i * n + j], y.c[i * n + j])) {
            ok = false;
            break;
          }
        }
      check(ok, "matrix triple {}x{}x{} #{}: C != A*B", k, m, n, t);
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Cache file

namespace {

constexpr char kMagic[8] = {'S', 'M', 'P', 'O', 'O', 'L', '\0', '\0'};
constexpr uint32_t kPoolVersion = 1;

class Writer {
 public:
  explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
    SECMOE_ENFORCE(out_.good(), ErrorCode::kIo, "cannot write {}", path);
  }
  void raw(const void* p, size_t n) {
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  }
  void u64(uint64_t v) { raw(&v, 8); }
  void words(const std::vector<uint64_t>& v) {
    u64(v.size());
    raw(v.data(), v.size() * 8);
  }
  void bits(const BitVec& b) {
    u64(b.size());
    raw(b.words().data(), b.words().size() * 8);
  }
  void finish(const std::string& path) {
    out_.flush();
    SECMOE_ENFORCE(out_.good(), ErrorCode::kIo, "short write to {}", path);
  }

 private:
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : in_(path, std::ios::binary) {
    SECMOE_ENFORCE(in_.good(), ErrorCode::kIo, "cannot open {}", path);
  }
  void raw(void* p, size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    SECMOE_ENFORCE(static_cast<size_t>(in_.gcount()) == n,
                   ErrorCode::kMalformedFile, "pool file truncated");
  }
  uint64_t u64() {
    uint64_t v;
    raw(&v, 8);
    return v;
  }
  uint64_t count(uint64_t limit = uint64_t{1} << 36) {
    uint64_t n = u64();
    SECMOE_ENFORCE(n <= limit, ErrorCode::kMalformedFile,
                   "implausible element count {}", n);
    return n;
  }
  std::vector<uint64_t> words() {
    std::vector<uint64_t> v(count());
    raw(v.data(), v.size() * 8);
    return v;
  }
  BitVec bits() {
    const uint64_t n = count();
    std::vector<uint64_t> w((n + 63) / 64);
    raw(w.data(), w.size() * 8);
    return BitVec::from_words(std::move(w), n);
  }

 private:
  std::ifstream in_;
};

void write_budget(Writer& w, const Budget& b) {
  for (uint64_t v : {b.triples, b.and_bits, b.msb_masks, b.bit_corrs,
                     b.mux_corrs})
    w.u64(v);
  w.u64(b.trunc_masks.size());
  for (const auto& [k, v] : b.trunc_masks) {
    w.u64(static_cast<uint64_t>(k));
    w.u64(v);
  }
  w.u64(b.mat_triples.size());
  for (const auto& [d, v] : b.mat_triples) {
    for (auto x : d) w.u64(x);
    w.u64(v);
  }
}

Budget read_budget(Reader& r) {
  Budget b;
  b.triples = r.count();
  b.and_bits = r.count();
  b.msb_masks = r.count();
  b.bit_corrs = r.count();
  b.mux_corrs = r.count();
  for (uint64_t i = 0, n = r.count(128); i < n; ++i) {
    int k = static_cast<int>(r.count(64));
    b.trunc_masks[k] = r.count();
  }
  for (uint64_t i = 0, n = r.count(4096); i < n; ++i) {
    MatDims d{r.count(1 << 20), r.count(1 << 20), r.count(1 << 20)};
    b.mat_triples[d] = r.count();
  }
  return b;
}

}  // namespace

void CorrelationPool::save(const std::string& path) const {
  SECMOE_ENFORCE(!counting_, ErrorCode::kInvalidConfig,
                 "cannot save a counting pool");
  Writer w(path);
  w.raw(kMagic, sizeof(kMagic));
  w.u64(kPoolVersion);
  w.u64(static_cast<uint64_t>(ell_));
  w.u64(static_cast<uint64_t>(role_));
  write_budget(w, capacity_);
  write_budget(w, consumed_);
  w.words(triples_.a);
  w.words(triples_.b);
  w.words(triples_.c);
  w.bits(and_a_);
  w.bits(and_b_);
  w.bits(and_c_);
  w.words(msb_r_);
  w.words(msb_bits_);
  w.bits(bit_bool_);
  w.words(bit_arith_);
  w.bits(mux_bool_);
  w.words(mux_rho_);
  w.words(mux_a_);
  w.words(mux_rho_a_);
  for (const auto& [shift, q] : trunc_) {
    w.words(q.r);
    w.words(q.r_hi);
    w.words(q.bits);
  }
  for (const auto& [dims, v] : mat_) {
    for (const auto& t : v) {
      w.words(t.a);
      w.words(t.b);
      w.words(t.c);
    }
  }
  w.finish(path);
}

CorrelationPool CorrelationPool::load(const std::string& path) {
  Reader r(path);
  char magic[8];
  r.raw(magic, sizeof(magic));
  SECMOE_ENFORCE(std::memcmp(magic, kMagic, sizeof(magic)) == 0,
                 ErrorCode::kMalformedFile, "{} is not a pool file", path);
  const uint64_t version = r.u64();
  SECMOE_ENFORCE(version == kPoolVersion, ErrorCode::kMalformedFile,
                 "pool file version {} unsupported (want {})", version,
                 kPoolVersion);
  CorrelationPool p;
  p.ell_ = static_cast<int>(r.count(64));
  const uint64_t role = r.count(1);
  p.role_ = static_cast<Role>(role);
  p.capacity_ = read_budget(r);
  p.consumed_ = read_budget(r);
  p.triples_.a = r.words();
  p.triples_.b = r.words();
  p.triples_.c = r.words();
  p.and_a_ = r.bits();
  p.and_b_ = r.bits();
  p.and_c_ = r.bits();
  p.msb_r_ = r.words();
  p.msb_bits_ = r.words();
  p.bit_bool_ = r.bits();
  p.bit_arith_ = r.words();
  p.mux_bool_ = r.bits();
  p.mux_rho_ = r.words();
  p.mux_a_ = r.words();
  p.mux_rho_a_ = r.words();
  for (const auto& [shift, count] : p.capacity_.trunc_masks) {
    auto& q = p.trunc_[shift];
    q.r = r.words();
    q.r_hi = r.words();
    q.bits = r.words();
    SECMOE_ENFORCE(q.r.size() == count, ErrorCode::kMalformedFile,
                   "trunc queue length mismatch");
  }
  for (const auto& [dims, count] : p.capacity_.mat_triples) {
    auto& v = p.mat_[dims];
    for (uint64_t t = 0; t < count; ++t) {
      MatTriple m;
      m.a = r.words();
      m.b = r.words();
      m.c = r.words();
      SECMOE_ENFORCE(m.a.size() == dims[0] * dims[1] &&
                         m.b.size() == dims[1] * dims[2] &&
                         m.c.size() == dims[0] * dims[2],
                     ErrorCode::kMalformedFile, "matrix triple dims mismatch");
      v.push_back(std::move(m));
    }
  }
  const Budget& b = p.capacity_;
  SECMOE_ENFORCE(p.triples_.c.size() == b.triples &&
                     p.and_c_.size() == b.and_bits &&
                     p.msb_r_.size() == b.msb_masks &&
                     p.bit_arith_.size() == b.bit_corrs &&
                     p.mux_rho_a_.size() == b.mux_corrs,
                 ErrorCode::kMalformedFile, "pool queues disagree with header");
  return p;
}

}  // namespace secmoe
