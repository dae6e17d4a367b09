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

#include "secmoe/sharing.h"

#include <algorithm>
#include <cstring>

namespace secmoe {

// ---------------------------------------------------------------------------
// Wire helpers

std::vector<uint8_t> pack_ring(std::span<const uint64_t> v, int ell) {
  const size_t w = (static_cast<size_t>(ell) + 7) / 8;
  std::vector<uint8_t> out(v.size() * w);
  if (w == 8) {
    std::memcpy(out.data(), v.data(), out.size());
    return out;
  }
  for (size_t i = 0; i < v.size(); ++i)
    for (size_t b = 0; b < w; ++b)
      out[i * w + b] = static_cast<uint8_t>(v[i] >> (8 * b));
  return out;
}

std::vector<uint64_t> unpack_ring(std::span<const uint8_t> bytes, size_t n,
                                  int ell) {
  const size_t w = (static_cast<size_t>(ell) + 7) / 8;
  SECMOE_ENFORCE(bytes.size() == n * w, ErrorCode::kProtocol,
                 "ring payload of {} bytes for {} elements of {} bits",
                 bytes.size(), n, ell);
  std::vector<uint64_t> out(n, 0);
  if (w == 8) {
    std::memcpy(out.data(), bytes.data(), bytes.size());
  } else {
    for (size_t i = 0; i < n; ++i)
      for (size_t b = 0; b < w; ++b)
        out[i] |= uint64_t{bytes[i * w + b]} << (8 * b);
  }
  const uint64_t m = ring_mask(ell);
  for (auto& x : out) x &= m;
  return out;
}

std::pair<std::vector<uint64_t>, std::vector<uint64_t>> split_with_mask(
    std::span<const uint64_t> x, std::span<const uint64_t> mask, int ell) {
  SECMOE_ENFORCE(x.size() == mask.size(), ErrorCode::kDimensionMismatch,
                 "split of {} values with {} masks", x.size(), mask.size());
  const uint64_t m = ring_mask(ell);
  std::vector<uint64_t> c(x.size()), s(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    c[i] = mask[i] & m;
    s[i] = (x[i] - mask[i]) & m;
  }
  return {std::move(c), std::move(s)};
}

std::vector<uint64_t> reconstruct(std::span<const uint64_t> a,
                                  std::span<const uint64_t> b, int ell) {
  SECMOE_ENFORCE(a.size() == b.size(), ErrorCode::kDimensionMismatch,
                 "reconstruct {} vs {} shares", a.size(), b.size());
  const uint64_t m = ring_mask(ell);
  std::vector<uint64_t> out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = (a[i] + b[i]) & m;
  return out;
}

namespace {

// Exchanges this party's ring shares and returns the opened values.
std::vector<uint64_t> open_ring(Party& p, Tag tag,
                                std::span<const uint64_t> mine) {
  auto theirs = unpack_ring(p.ep().exchange(tag, pack_ring(mine, p.ell())),
                            mine.size(), p.ell());
  const uint64_t m = p.mask();
  for (size_t i = 0; i < mine.size(); ++i) theirs[i] = (theirs[i] + mine[i]) & m;
  return theirs;
}

BitVec open_bits(Party& p, Tag tag, const BitVec& mine) {
  BitVec theirs =
      BitVec::from_bytes(p.ep().exchange(tag, mine.to_bytes()), mine.size());
  theirs ^= mine;
  return theirs;
}

void check_frac(const ArithShare& a, const ArithShare& b, const char* op) {
  SECMOE_ENFORCE(a.frac == b.frac, ErrorCode::kScaleMismatch,
                 "{} of values with {} and {} fractional bits", op, a.frac,
                 b.frac);
}

void check_size(size_t a, size_t b, const char* op) {
  SECMOE_ENFORCE(a == b, ErrorCode::kDimensionMismatch, "{}: {} vs {} elements",
                 op, a, b);
}

// Bit-planes lo..lo+w-1 of a batch of words: plane i holds bit (lo + i) of
// every element.
std::vector<BitVec> bit_planes(std::span<const uint64_t> words, int lo, int w) {
  const size_t n = words.size();
  const size_t nw = (n + 63) / 64;
  std::vector<BitVec> planes;
  planes.reserve(w);
  for (int i = 0; i < w; ++i) {
    std::vector<uint64_t> packed(nw, 0);
    const int bit = lo + i;
    for (size_t e = 0; e < n; ++e)
      packed[e >> 6] |= ((words[e] >> bit) & 1) << (e & 63);
    planes.push_back(BitVec::from_words(std::move(packed), n));
  }
  return planes;
}

struct LtNode {
  BitVec lt;
  BitVec eq;
};

// Leaves of the comparison z < r over bits [lo, lo + w), where z is public
// and r is shared bitwise. Bit i contributes lt_i = !z_i & r_i and
// eq_i = !(z_i ^ r_i).
std::vector<LtNode> lt_leaves(const Party& p, std::span<const uint64_t> z,
                              std::span<const uint64_t> r_bits, int lo, int w) {
  auto zp = bit_planes(z, lo, w);
  auto rp = bit_planes(r_bits, lo, w);
  std::vector<LtNode> leaves(w);
  for (int i = 0; i < w; ++i) {
    BitVec nz = ~zp[i];
    leaves[i].lt = rp[i] & nz;
    leaves[i].eq = p.is_client() ? (rp[i] ^ nz) : std::move(rp[i]);
  }
  return leaves;
}

// Reduces several comparison trees at once, one AND round per level. Each
// tree's leaves are ordered from the least significant bit. The root's eq is
// produced only when need_eq is set for that tree.
std::vector<LtNode> reduce_lt_trees(Party& p,
                                    std::vector<std::vector<LtNode>> trees,
                                    const std::vector<bool>& need_eq) {
  for (;;) {
    std::vector<BitVec> xs, ys;
    struct Pending {
      size_t tree, pair;
      bool with_eq;
    };
    std::vector<Pending> pending;
    for (size_t t = 0; t < trees.size(); ++t) {
      auto& nodes = trees[t];
      if (nodes.size() < 2) continue;
      const bool root_level = nodes.size() == 2;
      for (size_t j = 0; j + 1 < nodes.size(); j += 2) {
        const bool with_eq = !root_level || need_eq[t];
        pending.push_back({t, j, with_eq});
        xs.push_back(nodes[j + 1].eq);
        ys.push_back(nodes[j].lt);
        if (with_eq) {
          xs.push_back(nodes[j + 1].eq);
          ys.push_back(nodes[j].eq);
        }
      }
    }
    if (pending.empty()) break;
    BitVec prod = and_bits(p, BitVec::concat(xs), BitVec::concat(ys));
    size_t off = 0;
    std::vector<std::vector<LtNode>> next(trees.size());
    size_t pi = 0;
    for (size_t t = 0; t < trees.size(); ++t) {
      auto& nodes = trees[t];
      if (nodes.size() < 2) {
        next[t] = std::move(nodes);
        continue;
      }
      for (size_t j = 0; j + 1 < nodes.size(); j += 2, ++pi) {
        const Pending& pd = pending[pi];
        const size_t n = nodes[j].lt.size();
        LtNode merged;
        merged.lt = nodes[j + 1].lt ^ prod.slice(off, n);
        off += n;
        if (pd.with_eq) {
          merged.eq = prod.slice(off, n);
          off += n;
        }
        next[t].push_back(std::move(merged));
      }
      if (nodes.size() % 2 == 1) next[t].push_back(std::move(nodes.back()));
    }
    trees = std::move(next);
  }
  std::vector<LtNode> roots;
  roots.reserve(trees.size());
  for (auto& t : trees) roots.push_back(std::move(t.front()));
  return roots;
}

}  // namespace

// ---------------------------------------------------------------------------
// Sharing and reveal

ArithShare share_input(Party& p, Role owner,
                       const std::vector<uint64_t>* values, size_t n,
                       int frac) {
  if (p.role() == owner) {
    SECMOE_ENFORCE(values != nullptr && values->size() == n,
                   ErrorCode::kDimensionMismatch,
                   "owner must supply {} input values", n);
    std::vector<uint64_t> mask(n);
    for (auto& m : mask) m = p.prg().next_ring(p.ell());
    auto [mine, theirs] = split_with_mask(*values, mask, p.ell());
    p.ep().send(tags::kShareInput, pack_ring(theirs, p.ell()));
    return {std::move(mine), frac};
  }
  auto v = unpack_ring(p.ep().recv(tags::kShareInput), n, p.ell());
  return {std::move(v), frac};
}

BoolShare share_bits(Party& p, Role owner, const BitVec* bits, size_t n) {
  if (p.role() == owner) {
    SECMOE_ENFORCE(bits != nullptr && bits->size() == n,
                   ErrorCode::kDimensionMismatch,
                   "owner must supply {} input bits", n);
    std::vector<uint64_t> w((n + 63) / 64);
    for (auto& x : w) x = p.prg().next_u64();
    BitVec mask = BitVec::from_words(std::move(w), n);
    BitVec theirs = *bits ^ mask;
    p.ep().send(tags::kShareInput, theirs.to_bytes());
    return mask;
  }
  return BitVec::from_bytes(p.ep().recv(tags::kShareInput), n);
}

std::vector<uint64_t> reveal(Party& p, const ArithShare& x) {
  return open_ring(p, tags::kReveal, x.v);
}

std::vector<uint64_t> reveal_to(Party& p, const ArithShare& x, Role to) {
  if (p.role() == to) {
    auto theirs = unpack_ring(p.ep().recv(tags::kReveal), x.size(), p.ell());
    return reconstruct(x.v, theirs, p.ell());
  }
  p.ep().send(tags::kReveal, pack_ring(x.v, p.ell()));
  return {};
}

BitVec reveal_bits(Party& p, const BoolShare& x) {
  return open_bits(p, tags::kReveal, x);
}

// ---------------------------------------------------------------------------
// Local operations

ArithShare add(const Party& p, const ArithShare& a, const ArithShare& b) {
  check_size(a.size(), b.size(), "add");
  check_frac(a, b, "add");
  ArithShare out = a;
  const uint64_t m = p.mask();
  for (size_t i = 0; i < out.size(); ++i) out.v[i] = (out.v[i] + b.v[i]) & m;
  return out;
}

ArithShare sub(const Party& p, const ArithShare& a, const ArithShare& b) {
  check_size(a.size(), b.size(), "sub");
  check_frac(a, b, "sub");
  ArithShare out = a;
  const uint64_t m = p.mask();
  for (size_t i = 0; i < out.size(); ++i) out.v[i] = (out.v[i] - b.v[i]) & m;
  return out;
}

ArithShare neg(const Party& p, const ArithShare& a) {
  ArithShare out = a;
  const uint64_t m = p.mask();
  for (auto& x : out.v) x = (0 - x) & m;
  return out;
}

ArithShare add_public(const Party& p, const ArithShare& a,
                      std::span<const uint64_t> c) {
  check_size(a.size(), c.size(), "add_public");
  ArithShare out = a;
  if (!p.is_client()) return out;
  const uint64_t m = p.mask();
  for (size_t i = 0; i < out.size(); ++i) out.v[i] = (out.v[i] + c[i]) & m;
  return out;
}

ArithShare add_public(const Party& p, const ArithShare& a, uint64_t c) {
  ArithShare out = a;
  if (!p.is_client()) return out;
  const uint64_t m = p.mask();
  for (auto& x : out.v) x = (x + c) & m;
  return out;
}

ArithShare mul_public(const Party& p, const ArithShare& a,
                      std::span<const uint64_t> c, int c_frac) {
  check_size(a.size(), c.size(), "mul_public");
  ArithShare out = a;
  out.frac += c_frac;
  const uint64_t m = p.mask();
  for (size_t i = 0; i < out.size(); ++i) out.v[i] = (out.v[i] * c[i]) & m;
  return out;
}

ArithShare mul_public(const Party& p, const ArithShare& a, uint64_t c,
                      int c_frac) {
  ArithShare out = a;
  out.frac += c_frac;
  const uint64_t m = p.mask();
  for (auto& x : out.v) x = (x * c) & m;
  return out;
}

BoolShare xor_public(const Party& p, const BoolShare& a, const BitVec& c) {
  check_size(a.size(), c.size(), "xor_public");
  return p.is_client() ? (a ^ c) : a;
}

BoolShare not_share(const Party& p, const BoolShare& a) {
  return p.is_client() ? ~a : a;
}

// ---------------------------------------------------------------------------
// Multiplication

ArithShare mul_ring(Party& p, const ArithShare& a, const ArithShare& b) {
  check_size(a.size(), b.size(), "mul_ring");
  const size_t n = a.size();
  p.counters().mul += n;
  TripleBatch t = p.pool().take_triples(n);
  const uint64_t m = p.mask();
  std::vector<uint64_t> masked(2 * n);
  for (size_t i = 0; i < n; ++i) {
    masked[i] = (a.v[i] - t.a[i]) & m;
    masked[n + i] = (b.v[i] - t.b[i]) & m;
  }
  auto opened = open_ring(p, tags::kBeaverOpen, masked);
  ArithShare out(std::vector<uint64_t>(n), a.frac + b.frac);
  const bool client = p.is_client();
  for (size_t i = 0; i < n; ++i) {
    const uint64_t d = opened[i], e = opened[n + i];
    uint64_t z = t.c[i] + d * t.b[i] + e * t.a[i];
    if (client) z += d * e;
    out.v[i] = z & m;
  }
  return out;
}

BoolShare and_bits(Party& p, const BoolShare& x, const BoolShare& y) {
  check_size(x.size(), y.size(), "and_bits");
  const size_t n = x.size();
  p.counters().and_bits += n;
  if (n == 0) return BitVec();
  AndBatch t = p.pool().take_and(n);
  BitVec masked = BitVec::concat(std::vector<BitVec>{x ^ t.a, y ^ t.b});
  BitVec opened = open_bits(p, tags::kAndOpen, masked);
  BitVec d = opened.slice(0, n);
  BitVec e = opened.slice(n, n);
  BitVec z = t.c ^ (d & t.b) ^ (e & t.a);
  if (p.is_client()) z ^= d & e;
  return z;
}

// ---------------------------------------------------------------------------
// Truncation

namespace {

ArithShare trunc_local(Party& p, const ArithShare& a, int shift) {
  ArithShare out = a;
  const uint64_t m = p.mask();
  if (p.is_client()) {
    for (auto& x : out.v) x = (x & m) >> shift;
  } else {
    for (auto& x : out.v) x = (0 - (((0 - x) & m) >> shift)) & m;
  }
  return out;
}

}  // namespace

ArithShare trunc(Party& p, const ArithShare& a, int shift) {
  const int ell = p.ell();
  SECMOE_ENFORCE(shift > 0 && shift < ell, ErrorCode::kInvalidConfig,
                 "truncation by {} bits in a {}-bit ring", shift, ell);
  const size_t n = a.size();
  p.counters().trunc += n;
  if (p.trunc_mode() == TruncMode::kLocal) return trunc_local(p, a, shift);

  // Shift the signed range to [0, 2^ell) so the result follows from an
  // unsigned floor division, then correct for the two borrows the mask
  // introduces: one out of the low `shift` bits and one out of the ring.
  const uint64_t m = p.mask();
  const uint64_t half = uint64_t{1} << (ell - 1);
  TruncBatch tb = p.pool().take_trunc(n, shift);
  std::vector<uint64_t> masked(n);
  for (size_t i = 0; i < n; ++i) {
    uint64_t x = a.v[i] + tb.r[i];
    if (p.is_client()) x += half;
    masked[i] = x & m;
  }
  auto z = open_ring(p, tags::kTruncOpen, masked);

  std::vector<std::vector<LtNode>> trees;
  trees.push_back(lt_leaves(p, z, tb.bits, 0, shift));
  trees.push_back(lt_leaves(p, z, tb.bits, shift, ell - shift));
  auto roots = reduce_lt_trees(p, std::move(trees), {false, true});
  BitVec borrow = std::move(roots[0].lt);
  BitVec carry = and_bits(p, roots[1].eq, borrow);
  BitVec wrap = roots[1].lt ^ carry;

  ArithShare bits = b2a(p, BitVec::concat(std::vector<BitVec>{borrow, wrap}));
  const uint64_t wrap_weight = uint64_t{1} << (ell - shift);
  const uint64_t offset = uint64_t{1} << (ell - 1 - shift);
  ArithShare out(std::vector<uint64_t>(n), a.frac);
  for (size_t i = 0; i < n; ++i) {
    uint64_t y = bits.v[n + i] * wrap_weight - bits.v[i] - tb.r_hi[i];
    if (p.is_client()) y += (z[i] >> shift) - offset;
    out.v[i] = y & m;
  }
  return out;
}

ArithShare rescale(Party& p, const ArithShare& a, int extra) {
  const int s = p.cfg().scale;
  const int shift = a.frac - s + extra;
  SECMOE_ENFORCE(a.frac >= s && shift > 0, ErrorCode::kScaleMismatch,
                 "cannot rescale a value with {} fractional bits to {}",
                 a.frac, s);
  ArithShare out = trunc(p, a, shift);
  out.frac = s;
  return out;
}

ArithShare mul_fixed(Party& p, const ArithShare& a, const ArithShare& b) {
  return rescale(p, mul_ring(p, a, b));
}

// ---------------------------------------------------------------------------
// Comparison

BoolShare msb(Party& p, const ArithShare& a) {
  const int ell = p.ell();
  const size_t n = a.size();
  p.counters().msb += n;
  if (n == 0) return BitVec();
  // y = z - r with z opened; msb(y) = msb(z) ^ msb(r) ^ [low(z) < low(r)].
  MsbBatch mb = p.pool().take_msb(n);
  const uint64_t m = p.mask();
  std::vector<uint64_t> masked(n);
  for (size_t i = 0; i < n; ++i) masked[i] = (a.v[i] + mb.r[i]) & m;
  auto z = open_ring(p, tags::kMsbOpen, masked);

  std::vector<std::vector<LtNode>> trees;
  trees.push_back(lt_leaves(p, z, mb.bits, 0, ell - 1));
  auto roots = reduce_lt_trees(p, std::move(trees), {false});
  BitVec out = std::move(roots[0].lt);
  out ^= bit_planes(mb.bits, ell - 1, 1)[0];
  if (p.is_client()) out ^= bit_planes(z, ell - 1, 1)[0];
  return out;
}

std::vector<BoolShare> compare_lt(Party& p, const ArithShare& x,
                                  std::span<const uint64_t> thresholds) {
  const int ell = p.ell();
  const size_t n = x.size();
  const size_t t = thresholds.size();
  p.counters().compare += n * t;
  // One sign extraction for x itself plus one per nonzero threshold, all in
  // a single batch.
  std::vector<uint64_t> batch = x.v;
  std::vector<size_t> slot(t, 0);
  for (size_t j = 0; j < t; ++j) {
    if ((thresholds[j] & p.mask()) == 0) continue;
    slot[j] = batch.size() / n;
    ArithShare d = add_public(p, x, (0 - thresholds[j]) & p.mask());
    batch.insert(batch.end(), d.v.begin(), d.v.end());
  }
  BitVec signs = msb(p, ArithShare(std::move(batch), x.frac));
  BitVec sx = signs.slice(0, n);

  // x < t  <=>  msb(x) | msb(x - t)  for t >= 0, and msb(x) & msb(x - t)
  // for t < 0; the sign of x settles every case where x - t overflows.
  std::vector<BitVec> lhs, rhs;
  for (size_t j = 0; j < t; ++j) {
    if (slot[j] == 0) continue;
    lhs.push_back(sx);
    rhs.push_back(signs.slice(slot[j] * n, n));
  }
  BitVec prod = lhs.empty() ? BitVec()
                            : and_bits(p, BitVec::concat(lhs),
                                       BitVec::concat(rhs));
  std::vector<BoolShare> out;
  out.reserve(t);
  size_t k = 0;
  for (size_t j = 0; j < t; ++j) {
    if (slot[j] == 0) {
      out.push_back(sx);
      continue;
    }
    BitVec both = prod.slice(k * n, n);
    BitVec sd = signs.slice(slot[j] * n, n);
    ++k;
    if (msb(thresholds[j], ell)) {
      out.push_back(std::move(both));
    } else {
      out.push_back(sx ^ sd ^ both);
    }
  }
  return out;
}

BoolShare compare_lt(Party& p, const ArithShare& x, uint64_t threshold) {
  const uint64_t t[1] = {threshold};
  return std::move(compare_lt(p, x, t)[0]);
}

// ---------------------------------------------------------------------------
// Conversion and selection

ArithShare b2a(Party& p, const BoolShare& t) {
  const size_t n = t.size();
  p.counters().b2a += n;
  BitBatch bb = p.pool().take_bits(n);
  BitVec e = open_bits(p, tags::kBitOpen, t ^ bb.rho_bool);
  // t = e ^ rho = e + (1 - 2e) rho.
  const uint64_t m = p.mask();
  ArithShare out(std::vector<uint64_t>(n), 0);
  const bool client = p.is_client();
  for (size_t i = 0; i < n; ++i) {
    const bool ei = e.get(i);
    uint64_t v = ei ? (0 - bb.rho[i]) : bb.rho[i];
    if (client && ei) v += 1;
    out.v[i] = v & m;
  }
  return out;
}

ArithShare mux_public(Party& p, const BoolShare& sel,
                      std::span<const uint64_t> values, int frac) {
  check_size(sel.size(), values.size(), "mux_public");
  const size_t n = sel.size();
  p.counters().mux_public += n;
  BitBatch bb = p.pool().take_bits(n);
  BitVec e = open_bits(p, tags::kMuxOpen, sel ^ bb.rho_bool);
  const uint64_t m = p.mask();
  ArithShare out(std::vector<uint64_t>(n), frac);
  const bool client = p.is_client();
  for (size_t i = 0; i < n; ++i) {
    const bool ei = e.get(i);
    uint64_t v = ei ? (0 - bb.rho[i]) : bb.rho[i];
    if (client && ei) v += 1;
    out.v[i] = (v * values[i]) & m;
  }
  return out;
}

ArithShare mux(Party& p, const BoolShare& sel, const ArithShare& v) {
  check_size(sel.size(), v.size(), "mux");
  const size_t n = sel.size();
  p.counters().mux += n;
  MuxBatch mb = p.pool().take_mux(n);
  const uint64_t m = p.mask();
  // Open e = sel ^ rho and d = v - a in one message.
  std::vector<uint64_t> d_mine(n);
  for (size_t i = 0; i < n; ++i) d_mine[i] = (v.v[i] - mb.a[i]) & m;
  std::vector<uint8_t> payload = pack_ring(d_mine, p.ell());
  const BitVec e_mine = sel ^ mb.rho_bool;
  const auto eb = e_mine.to_bytes();
  payload.insert(payload.end(), eb.begin(), eb.end());
  auto reply = p.ep().exchange(tags::kMuxOpen, payload);
  const size_t ring_len = n * p.ring_bytes();
  SECMOE_ENFORCE(reply.size() == ring_len + eb.size(), ErrorCode::kProtocol,
                 "mux reply of {} bytes", reply.size());
  auto d = unpack_ring(std::span(reply).first(ring_len), n, p.ell());
  BitVec e = BitVec::from_bytes(std::span(reply).subspan(ring_len), n);
  e ^= e_mine;
  // sel * v = e*d + e*a + (1 - 2e)(rho*d + rho*a).
  ArithShare out(std::vector<uint64_t>(n), v.frac);
  const bool client = p.is_client();
  for (size_t i = 0; i < n; ++i) {
    const uint64_t di = (d[i] + d_mine[i]) & m;
    const bool ei = e.get(i);
    uint64_t rho_part = di * mb.rho[i] + mb.rho_a[i];
    uint64_t z = ei ? (mb.a[i] - rho_part) : rho_part;
    if (client && ei) z += di;
    out.v[i] = z & m;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Matrix products

namespace {

void matmul_acc(const uint64_t* a, const uint64_t* b, uint64_t* c, size_t k,
                size_t m, size_t n) {
  for (size_t i = 0; i < k; ++i)
    for (size_t l = 0; l < m; ++l) {
      const uint64_t x = a[i * m + l];
      if (x == 0) continue;
      const uint64_t* br = b + l * n;
      uint64_t* cr = c + i * n;
      for (size_t j = 0; j < n; ++j) cr[j] += x * br[j];
    }
}

}  // namespace

std::vector<ArithShare> matmul_shared(Party& p,
                                      std::span<const ArithShare> a,
                                      std::span<const ArithShare> b, size_t k,
                                      size_t m, size_t n) {
  check_size(a.size(), b.size(), "matmul_shared batch");
  const size_t batch = a.size();
  p.counters().matmul_ss += batch;
  const uint64_t mask = p.mask();
  std::vector<MatTriple> triples;
  std::vector<uint64_t> masked;
  masked.reserve(batch * (k * m + m * n));
  for (size_t t = 0; t < batch; ++t) {
    check_size(a[t].size(), k * m, "matmul_shared lhs");
    check_size(b[t].size(), m * n, "matmul_shared rhs");
    triples.push_back(p.pool().take_mat(k, m, n));
    const auto& tr = triples.back();
    for (size_t i = 0; i < k * m; ++i)
      masked.push_back((a[t].v[i] - tr.a[i]) & mask);
    for (size_t i = 0; i < m * n; ++i)
      masked.push_back((b[t].v[i] - tr.b[i]) & mask);
  }
  auto opened = open_ring(p, tags::kMatBeaverOpen, masked);
  std::vector<ArithShare> out;
  out.reserve(batch);
  const size_t stride = k * m + m * n;
  for (size_t t = 0; t < batch; ++t) {
    const uint64_t* e = opened.data() + t * stride;
    const uint64_t* f = e + k * m;
    const auto& tr = triples[t];
    std::vector<uint64_t> z = tr.c;
    matmul_acc(e, tr.b.data(), z.data(), k, m, n);
    matmul_acc(tr.a.data(), f, z.data(), k, m, n);
    if (p.is_client()) matmul_acc(e, f, z.data(), k, m, n);
    for (auto& x : z) x &= mask;
    out.emplace_back(std::move(z), a[t].frac + b[t].frac);
  }
  return out;
}

}  // namespace secmoe
