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

#include "secmoe/selftest.h"

#include <chrono>

#include <fmt/format.h>

#include "secmoe/dealer.h"
#include "secmoe/evaluator.h"
#include "secmoe/he.h"
#include "secmoe/he_matmul.h"
#include "secmoe/prg.h"
#include "secmoe/protocols/nonlinear.h"
#include "secmoe/session.h"
#include "secmoe/sharing.h"

namespace secmoe {

namespace {

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

void record(SuiteResult& r, bool ok, const std::function<std::string()>& what) {
  ++r.checked;
  if (ok) return;
  if (r.failed++ == 0) r.first_failure = what();
}

SessionConfig session(int ell, int scale, uint64_t seed) {
  SessionConfig sc;
  sc.cfg = FixedConfig{ell, scale};
  sc.seed = seed;
  return sc;
}

// Runs body on both parties; returns the client's result.
template <class R>
R two_party(const SessionConfig& sc, const std::function<R(Party&)>& body) {
  R out[2];
  run_inproc(sc, [&](Party& p) { out[p.is_client() ? 0 : 1] = body(p); });
  return out[0];
}

ArithShare input_of(Party& p, Role owner, const std::vector<uint64_t>& v,
                    int frac = 0) {
  return share_input(p, owner, p.role() == owner ? &v : nullptr, v.size(),
                     frac);
}

std::vector<uint64_t> bits_to_words(const BitVec& b) {
  std::vector<uint64_t> out(b.size());
  for (size_t i = 0; i < b.size(); ++i) out[i] = b.get(i);
  return out;
}

}  // namespace

SuiteResult suite_compare_exhaustive(int ell) {
  SuiteResult r{fmt::format("compare exhaustive ({}-bit ring)", ell)};
  Timer timer;
  const uint64_t size = uint64_t{1} << ell;
  std::vector<uint64_t> xs(size);
  for (uint64_t x = 0; x < size; ++x) xs[x] = x;
  // Thresholds go in chunks so each session's correlations stay small.
  const uint64_t chunk = std::max<uint64_t>(1, (uint64_t{1} << 18) / size);
  for (uint64_t t0 = 0; t0 < size; t0 += chunk) {
    std::vector<uint64_t> ts;
    for (uint64_t t = t0; t < std::min(size, t0 + chunk); ++t) ts.push_back(t);
    auto got = two_party<std::vector<uint64_t>>(
        session(ell, 1, 17 + t0), [&](Party& p) {
          auto x = input_of(p, Role::kClient, xs);
          auto res = compare_lt(p, x, ts);
          std::vector<uint64_t> flat;
          for (const auto& b : res) {
            auto w = bits_to_words(reveal_bits(p, b));
            flat.insert(flat.end(), w.begin(), w.end());
          }
          return flat;
        });
    for (size_t j = 0; j < ts.size(); ++j)
      for (uint64_t x = 0; x < size; ++x) {
        const bool want = to_signed(x, ell) < to_signed(ts[j], ell);
        record(r, got[j * size + x] == want, [&] {
          return fmt::format("x={} t={}: got {}", to_signed(x, ell),
                             to_signed(ts[j], ell), got[j * size + x]);
        });
      }
  }
  r.seconds = timer.seconds();
  return r;
}

SuiteResult suite_trunc_exhaustive(int ell) {
  SuiteResult r{fmt::format("truncation exhaustive ({}-bit ring)", ell)};
  Timer timer;
  const uint64_t size = uint64_t{1} << ell;
  std::vector<uint64_t> xs(size);
  for (uint64_t x = 0; x < size; ++x) xs[x] = x;
  for (int shift = 1; shift < ell; ++shift) {
    auto got = two_party<std::vector<uint64_t>>(
        session(ell, 1, 29 + shift), [&](Party& p) {
          auto x = input_of(p, Role::kClient, xs);
          return reveal(p, trunc(p, x, shift));
        });
    for (uint64_t x = 0; x < size; ++x) {
      const uint64_t want = from_signed(to_signed(x, ell) >> shift, ell);
      record(r, got[x] == want, [&] {
        return fmt::format("x={} shift={}: got {} want {}", to_signed(x, ell),
                           shift, to_signed(got[x], ell), to_signed(want, ell));
      });
    }
  }
  r.seconds = timer.seconds();
  return r;
}

SuiteResult suite_random_ops(size_t n, uint64_t seed) {
  SuiteResult r{fmt::format("random ring ops (64-bit, n={})", n)};
  Timer timer;
  Prg prg(seed, 0x0b5);
  std::vector<uint64_t> x(n), y(n), c(n), bits(n);
  BitVec sel(n);
  for (size_t i = 0; i < n; ++i) {
    x[i] = prg.next_u64();
    y[i] = prg.next_u64();
    c[i] = prg.next_u64();
    bits[i] = prg.next_bit();
    sel.set(i, prg.next_bit());
  }
  struct Out {
    std::vector<uint64_t> prod, mux, mux_pub, b2a, andb, sign;
  };
  auto got = two_party<Out>(session(64, 18, seed), [&](Party& p) {
    auto xs = input_of(p, Role::kClient, x);
    auto ys = input_of(p, Role::kServer, y);
    auto sb = share_bits(p, Role::kClient, p.is_client() ? &sel : nullptr, n);
    BitVec other(n);
    for (size_t i = 0; i < n; ++i) other.set(i, bits[i]);
    auto ob = share_bits(p, Role::kServer, p.is_client() ? nullptr : &other, n);
    Out o;
    o.prod = reveal(p, mul_ring(p, xs, ys));
    o.mux = reveal(p, mux(p, sb, ys));
    o.mux_pub = reveal(p, mux_public(p, sb, c, 0));
    o.b2a = reveal(p, b2a(p, sb));
    o.andb = bits_to_words(reveal_bits(p, and_bits(p, sb, ob)));
    o.sign = bits_to_words(reveal_bits(p, msb(p, xs)));
    return o;
  });
  for (size_t i = 0; i < n; ++i) {
    const uint64_t s = sel.get(i);
    auto fail = [&](const char* op) {
      return [=] { return fmt::format("{} at {}", op, i); };
    };
    record(r, got.prod[i] == x[i] * y[i], fail("mul"));
    record(r, got.mux[i] == (s ? y[i] : 0), fail("mux"));
    record(r, got.mux_pub[i] == (s ? c[i] : 0), fail("mux_public"));
    record(r, got.b2a[i] == s, fail("b2a"));
    record(r, got.andb[i] == (s & bits[i]), fail("and"));
    record(r, got.sign[i] == (x[i] >> 63), fail("msb"));
  }
  r.seconds = timer.seconds();
  return r;
}

SuiteResult suite_gelu(size_t n, uint64_t seed) {
  SuiteResult r{fmt::format("secure GeLU vs plaintext (n={})", n)};
  Timer timer;
  const FixedConfig cfg;
  Prg prg(seed, 0x6e1);
  std::vector<uint64_t> x(n);
  for (auto& v : x) v = encode(12.0 * prg.next_unit() - 7.0, cfg);
  PlainEvaluator pev(cfg);
  auto want = gelu(pev, ArithShare(x, cfg.scale)).v;
  auto got = two_party<std::vector<uint64_t>>(session(64, 18, seed), [&](Party& p) {
    SecureEvaluator ev(p);
    return ev.reveal(gelu(ev, input_of(p, Role::kClient, x, cfg.scale)));
  });
  for (size_t i = 0; i < n; ++i)
    record(r, got[i] == want[i], [&] {
      return fmt::format("x={}: got {} want {}", decode(x[i], cfg),
                         decode(got[i], cfg), decode(want[i], cfg));
    });
  r.seconds = timer.seconds();
  return r;
}

namespace {

Budget audit_budget(size_t n) {
  Budget b;
  b.triples = n;
  b.and_bits = n;
  b.msb_masks = n / 4;
  b.bit_corrs = n / 4;
  b.mux_corrs = n / 4;
  b.trunc_masks[18] = n / 4;
  b.mat_triples[MatDims{4, 8, 4}] = 8;
  return b;
}

}  // namespace

SuiteResult suite_dealer_audit(size_t n, uint64_t seed) {
  SuiteResult r{fmt::format("dealer audit (n={})", n)};
  Timer timer;
  auto [c, s] = Dealer::deal(audit_budget(n), seed, 64);
  auto rep = Dealer::audit(c, s);
  r.checked = rep.checked;
  r.failed = rep.failed;
  if (!rep.failures.empty()) r.first_failure = rep.failures.front();
  r.seconds = timer.seconds();
  return r;
}

SuiteResult suite_corrupted_pool(uint64_t seed) {
  SuiteResult r{"corrupted pool is detected"};
  Timer timer;
  auto [c, s] = Dealer::deal(audit_budget(256), seed, 64);
  PoolAccess::triple_c(c)[7] ^= 1;
  auto rep = Dealer::audit(c, s);
  record(r, rep.failed == 1, [&] {
    return fmt::format("audit reported {} failures for one flipped triple",
                       rep.failed);
  });
  r.seconds = timer.seconds();
  return r;
}

namespace {

std::vector<uint64_t> schoolbook_negacyclic(const std::vector<uint64_t>& a,
                                            const std::vector<uint64_t>& b,
                                            uint64_t mask) {
  const size_t n = a.size();
  std::vector<uint64_t> out(n, 0);
  for (size_t i = 0; i < n; ++i) {
    if (!a[i]) continue;
    for (size_t j = 0; j < n; ++j) {
      if (!b[j]) continue;
      const uint64_t t = a[i] * b[j];
      if (i + j < n) out[i + j] += t;
      else out[i + j - n] -= t;
    }
  }
  for (auto& v : out) v &= mask;
  return out;
}

struct MatCase {
  size_t k, m, n;
  std::vector<uint64_t> x, w;
};

MatCase random_case(Prg& prg, uint64_t mask) {
  MatCase c;
  c.k = 1 + prg.next_u64() % 8;
  c.m = 1 + prg.next_u64() % 8;
  c.n = 1 + prg.next_u64() % 8;
  c.x.resize(c.k * c.m);
  c.w.resize(c.m * c.n);
  for (auto& v : c.x) v = prg.next_u64() & mask;
  for (auto& v : c.w) v = prg.next_u64() & mask;
  return c;
}

std::vector<uint64_t> plain_matmul(const MatCase& c, uint64_t mask) {
  std::vector<uint64_t> out(c.k * c.n, 0);
  for (size_t i = 0; i < c.k; ++i)
    for (size_t j = 0; j < c.n; ++j) {
      uint64_t acc = 0;
      for (size_t t = 0; t < c.m; ++t) acc += c.x[i * c.m + t] * c.w[t * c.n + j];
      out[i * c.n + j] = acc & mask;
    }
  return out;
}

}  // namespace

SuiteResult suite_he_matmul(size_t trials, uint64_t seed) {
  SuiteResult r{fmt::format("HE matmul vs schoolbook (N=4096, {} trials)", trials)};
  Timer timer;
  he::HeParams params;
  auto sk = he::SecretKey::generate(params, seed);
  he::Engine eng(params);
  const size_t N = params.ring_degree;
  const uint64_t mask = params.plain_mask();
  Prg prg(seed, 0x4e3);
  for (size_t t = 0; t < trials; ++t) {
    auto c = random_case(prg, mask);
    auto xl = he::encode_left(c.x, c.k, c.m, c.n, N);
    auto wr = he::encode_right(c.w, c.m, c.n, N);
    auto prod = sk.decrypt(eng.mul_plain(sk.encrypt(xl), wr));
    record(r, prod.coeffs == schoolbook_negacyclic(xl.coeffs, wr.coeffs, mask),
           [&] { return fmt::format("polynomial product, trial {}", t); });
    record(r, he::matmul_extract(prod, c.k, c.m, c.n) == plain_matmul(c, mask),
           [&] {
             return fmt::format("matrix product {}x{}x{}, trial {}", c.k, c.m,
                                c.n, t);
           });
  }
  r.seconds = timer.seconds();
  return r;
}

SuiteResult suite_he_engines(size_t trials, uint64_t seed) {
  SuiteResult r{fmt::format("rlwe vs semantic engine ({} compositions)", trials)};
  Timer timer;
  he::HeParams sem;
  sem.plain_bits = 16;
  he::HeParams rl = sem;
  rl.kind = he::EngineKind::kRlwe;
  auto sk_sem = he::SecretKey::generate(sem, seed);
  auto sk_rl = he::SecretKey::generate(rl, seed);
  he::Engine e_sem(sem), e_rl(rl);
  const size_t N = sem.ring_degree;
  const uint64_t mask = sem.plain_mask();
  Prg prg(seed, 0x4e4);
  for (size_t t = 0; t < trials; ++t) {
    // enc(x1) * w1 + enc(x2) * w2 + p, the shape of a masked response.
    auto a = random_case(prg, mask);
    auto b = random_case(prg, mask);
    b.k = a.k, b.m = a.m, b.n = a.n;
    b.x.resize(a.x.size());
    b.w.resize(a.w.size());
    he::Plaintext mask_pt(N);
    for (auto& v : mask_pt.coeffs) v = prg.next_u64() & mask;
    auto run = [&](he::SecretKey& sk, const he::Engine& eng) {
      auto c1 = eng.mul_plain(sk.encrypt(he::encode_left(a.x, a.k, a.m, a.n, N)),
                              he::encode_right(a.w, a.m, a.n, N));
      auto c2 = eng.mul_plain(sk.encrypt(he::encode_left(b.x, b.k, b.m, b.n, N)),
                              he::encode_right(b.w, b.m, b.n, N));
      return sk.decrypt(eng.add_plain(eng.add(c1, c2), mask_pt));
    };
    record(r, run(sk_rl, e_rl) == run(sk_sem, e_sem),
           [&] { return fmt::format("composition {}", t); });
  }
  r.seconds = timer.seconds();
  return r;
}

std::vector<SuiteResult> run_selftest(
    SelftestLevel level, const std::function<void(const SuiteResult&)>& on_result) {
  const bool full = level == SelftestLevel::kFull;
  std::vector<std::function<SuiteResult()>> suites = {
      [&] { return suite_compare_exhaustive(full ? 12 : 8); },
      [&] { return suite_trunc_exhaustive(full ? 12 : 10); },
      [&] { return suite_random_ops(full ? 10000 : 1000, 3); },
      [&] { return suite_gelu(full ? 10000 : 1000, 4); },
      [&] { return suite_dealer_audit(full ? 100000 : 10000, 5); },
      [&] { return suite_corrupted_pool(6); },
      [&] { return suite_he_matmul(full ? 200 : 20, 7); },
      [&] { return suite_he_engines(full ? 200 : 10, 8); },
  };
  std::vector<SuiteResult> out;
  for (size_t i = 0; i < suites.size(); ++i) {
    SuiteResult r;
    try {
      r = suites[i]();
    } catch (const std::exception& e) {
      r.name = fmt::format("suite {}", i + 1);
      r.failed = 1;
      r.first_failure = e.what();
    }
    if (on_result) on_result(r);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace secmoe
