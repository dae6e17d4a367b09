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

#include "secmoe/protocols/nonlinear.h"

#include <cmath>

namespace secmoe {

// ---------------------------------------------------------------------------
// Specs

size_t PiecewiseSpec::nonzero_count() const {
  size_t n = 0;
  for (const auto& row : coeffs)
    for (double c : row) n += c != 0.0;
  return n;
}

size_t PiecewiseSpec::segment_of(double x) const {
  for (size_t i = 0; i < breakpoints.size(); ++i)
    if (x <= breakpoints[i]) return i;
  return breakpoints.size();
}

void PiecewiseSpec::validate() const {
  SECMOE_ENFORCE(!coeffs.empty() && breakpoints.size() + 1 == coeffs.size(),
                 ErrorCode::kInvalidConfig,
                 "{} segments need {} breakpoints, got {}", coeffs.size(),
                 coeffs.size() - 1, breakpoints.size());
  for (size_t i = 1; i < breakpoints.size(); ++i)
    SECMOE_ENFORCE(breakpoints[i - 1] < breakpoints[i],
                   ErrorCode::kInvalidConfig,
                   "breakpoints must increase strictly");
  for (const auto& row : coeffs)
    SECMOE_ENFORCE(row.size() == coeffs[0].size() && !row.empty(),
                   ErrorCode::kInvalidConfig,
                   "coefficient rows must share one degree");
}

PiecewiseSpec gelu_spec() {
  return {
      {-5.0, -3.0, -1.0, 1.0, 3.0},
      {
          {0.0, 0.0, 0.0},
          {-0.02986296, -0.01380208, -0.00158297},
          {-0.36497047, -0.23581369, -0.0384032},
          {0.00485947, 0.50000716, 0.3482604},
          {-0.36491015, 1.23575599, -0.03839009},
          {0.0, 1.0, 0.0},
      },
  };
}

void ExpSpec::validate() const {
  SECMOE_ENFORCE(threshold < 0.0, ErrorCode::kInvalidConfig,
                 "exp threshold {} must be negative", threshold);
  SECMOE_ENFORCE(iterations >= 1 && iterations < 30, ErrorCode::kInvalidConfig,
                 "exp iterations {} out of range", iterations);
}

double gelu_plain(double x, const PiecewiseSpec& spec) {
  const auto& row = spec.coeffs[spec.segment_of(x)];
  double y = 0.0;
  for (size_t k = row.size(); k-- > 0;) y = y * x + row[k];
  return y;
}

double gelu_exact(double x) { return 0.5 * x * std::erfc(-x / std::sqrt(2.0)); }

// ---------------------------------------------------------------------------
// Piecewise polynomials

namespace {

// Encoded coefficient, repeated n times.
std::vector<uint64_t> repeat(uint64_t v, size_t n) {
  return std::vector<uint64_t>(n, v);
}

ArithShare negate(Evaluator& ev, const ArithShare& a) {
  return ev.mul_public(a, ev.mask(), 0);
}

// x, x^2, ..., x^degree at scale s.
std::vector<ArithShare> powers(Evaluator& ev, const ArithShare& x,
                               size_t degree) {
  std::vector<ArithShare> p{x};
  for (size_t k = 2; k <= degree; ++k) p.push_back(ev.mul_fx(p.back(), x));
  return p;
}

}  // namespace

std::vector<BitVec> segment_indicators(Evaluator& ev, const ArithShare& x,
                                       const PiecewiseSpec& spec) {
  spec.validate();
  const size_t n = x.size();
  const size_t segs = spec.segments();
  if (segs == 1) return {ev.public_bits(n, true)};
  // x <= b  <=>  x < b + 1 ulp.
  std::vector<uint64_t> thresholds;
  for (double b : spec.breakpoints)
    thresholds.push_back((ev.enc(b) + 1) & ev.mask());
  auto cmp = ev.less_than(x, thresholds);
  // The comparisons are monotone in the breakpoint, so adjacent ones differ
  // exactly on the segment between them.
  std::vector<BitVec> ind;
  ind.push_back(cmp[0]);
  for (size_t j = 1; j + 1 < segs; ++j) ind.push_back(cmp[j] ^ cmp[j - 1]);
  ind.push_back(ev.not_bits(cmp[segs - 2]));
  return ind;
}

ArithShare gelu(Evaluator& ev, const ArithShare& x, const PiecewiseSpec& spec) {
  SECMOE_ENFORCE(x.frac == ev.scale(), ErrorCode::kScaleMismatch,
                 "gelu input has {} fractional bits", x.frac);
  const size_t n = x.size();
  const size_t deg = spec.degree();
  auto ind = segment_indicators(ev, x, spec);

  // Selection: one public-value MUX per nonzero coefficient, all batched.
  std::vector<BitVec> sels;
  std::vector<uint64_t> values;
  std::vector<std::pair<size_t, size_t>> where;  // (column, segment)
  for (size_t c = 0; c <= deg; ++c)
    for (size_t r = 0; r < spec.segments(); ++r) {
      const double coef = spec.coeffs[r][c];
      if (coef == 0.0) continue;
      sels.push_back(ind[r]);
      auto rep = repeat(ev.enc(coef), n);
      values.insert(values.end(), rep.begin(), rep.end());
      where.emplace_back(c, r);
    }
  std::vector<ArithShare> column(deg + 1,
                                 ArithShare(std::vector<uint64_t>(n, 0),
                                            ev.scale()));
  std::vector<bool> used(deg + 1, false);
  if (!sels.empty()) {
    ArithShare picked =
        ev.mux_public(BitVec::concat(sels), values, ev.scale());
    for (size_t i = 0; i < where.size(); ++i) {
      const size_t c = where[i].first;
      column[c] = ev.add(column[c], slice(picked, i * n, n));
      used[c] = true;
    }
  }

  // Compute: one polynomial of the common degree.
  ArithShare y = column[0];
  std::vector<ArithShare> lhs, rhs;
  if (deg >= 1) {
    auto xp = powers(ev, x, deg);
    for (size_t k = 1; k <= deg; ++k) {
      if (!used[k]) continue;
      lhs.push_back(xp[k - 1]);
      rhs.push_back(column[k]);
    }
  }
  if (!lhs.empty()) {
    ArithShare terms = ev.mul_fx(concat(lhs), concat(rhs));
    for (size_t i = 0; i < lhs.size(); ++i) y = ev.add(y, slice(terms, i * n, n));
  }
  return y;
}

ArithShare naive_piecewise_gelu(Evaluator& ev, const ArithShare& x,
                                const PiecewiseSpec& spec) {
  SECMOE_ENFORCE(x.frac == ev.scale(), ErrorCode::kScaleMismatch,
                 "gelu input has {} fractional bits", x.frac);
  const size_t n = x.size();
  const size_t deg = spec.degree();
  auto ind = segment_indicators(ev, x, spec);
  auto xp = deg >= 1 ? powers(ev, x, deg) : std::vector<ArithShare>{};

  // Each segment polynomial evaluated on its own with coefficient products,
  // the constant entering as a public sharing.
  std::vector<ArithShare> lhs, rhs;
  std::vector<std::pair<size_t, size_t>> where;  // (segment, power)
  std::vector<size_t> live;
  for (size_t r = 0; r < spec.segments(); ++r) {
    bool any = false;
    for (size_t k = 0; k <= deg; ++k) any |= spec.coeffs[r][k] != 0.0;
    if (!any) continue;
    live.push_back(r);
    for (size_t k = 1; k <= deg; ++k) {
      if (spec.coeffs[r][k] == 0.0) continue;
      lhs.push_back(xp[k - 1]);
      rhs.push_back(ev.owned(Role::kClient, repeat(ev.enc(spec.coeffs[r][k]), n),
                             ev.scale()));
      where.emplace_back(r, k);
    }
  }
  ArithShare terms;
  if (!lhs.empty()) terms = ev.mul_fx(concat(lhs), concat(rhs));
  std::vector<ArithShare> polys;
  std::vector<BitVec> sels;
  for (size_t r : live) {
    ArithShare pr = ev.owned(Role::kClient, repeat(ev.enc(spec.coeffs[r][0]), n),
                             ev.scale());
    for (size_t i = 0; i < where.size(); ++i)
      if (where[i].first == r) pr = ev.add(pr, slice(terms, i * n, n));
    polys.push_back(std::move(pr));
    sels.push_back(ind[r]);
  }
  ArithShare y(std::vector<uint64_t>(n, 0), ev.scale());
  if (polys.empty()) return y;
  ArithShare gated = ev.mux(BitVec::concat(sels), concat(polys));
  for (size_t i = 0; i < polys.size(); ++i) y = ev.add(y, slice(gated, i * n, n));
  return y;
}

// ---------------------------------------------------------------------------
// Exponential, reciprocal, inverse square root

ArithShare exp_neg(Evaluator& ev, const ArithShare& x, const ExpSpec& spec) {
  spec.validate();
  SECMOE_ENFORCE(x.frac == ev.scale(), ErrorCode::kScaleMismatch,
                 "exp input has {} fractional bits", x.frac);
  const uint64_t t[1] = {ev.enc(spec.threshold)};
  BitVec clipped = ev.less_than(x, t)[0];
  ArithShare y = ev.add_public(ev.trunc(x, spec.iterations), ev.enc(1.0));
  for (int i = 0; i < spec.iterations; ++i) y = ev.mul_fx(y, y);
  return ev.mux(ev.not_bits(clipped), y);
}

Pow2Normalized normalize_pow2(Evaluator& ev, const ArithShare& x, int kmin,
                              int kmax, bool with_sqrt) {
  SECMOE_ENFORCE(kmin < kmax, ErrorCode::kInvalidConfig,
                 "empty exponent range [{}, {}]", kmin, kmax);
  const size_t n = x.size();
  std::vector<uint64_t> thresholds;
  for (int k = kmin; k < kmax; ++k) thresholds.push_back(ev.enc(std::ldexp(1.0, k)));
  auto cmp = ev.less_than(x, thresholds);
  std::vector<BitVec> sels;
  std::vector<uint64_t> f, g;
  const size_t buckets = static_cast<size_t>(kmax - kmin) + 1;
  for (size_t b = 0; b < buckets; ++b) {
    BitVec ind = b == 0              ? cmp[0]
                 : b + 1 == buckets ? ev.not_bits(cmp[b - 1])
                                    : cmp[b] ^ cmp[b - 1];
    const int k = kmin + static_cast<int>(b);
    sels.push_back(std::move(ind));
    auto fr = repeat(ev.enc(std::ldexp(1.0, -k)), n);
    f.insert(f.end(), fr.begin(), fr.end());
    if (with_sqrt) {
      auto gr = repeat(ev.enc(std::pow(2.0, -0.5 * k)), n);
      g.insert(g.end(), gr.begin(), gr.end());
    }
  }
  BitVec all = BitVec::concat(sels);
  std::vector<uint64_t> values = f;
  BitVec mux_sel = all;
  if (with_sqrt) {
    values.insert(values.end(), g.begin(), g.end());
    mux_sel.append(all);
  }
  ArithShare picked = ev.mux_public(mux_sel, values, ev.scale());
  Pow2Normalized out;
  out.factor = ArithShare(std::vector<uint64_t>(n, 0), ev.scale());
  for (size_t b = 0; b < buckets; ++b)
    out.factor = ev.add(out.factor, slice(picked, b * n, n));
  if (with_sqrt) {
    out.sqrt_factor = ArithShare(std::vector<uint64_t>(n, 0), ev.scale());
    for (size_t b = 0; b < buckets; ++b)
      out.sqrt_factor =
          ev.add(out.sqrt_factor, slice(picked, (buckets + b) * n, n));
  }
  out.value = ev.mul_fx(x, out.factor);
  return out;
}

ArithShare reciprocal(Evaluator& ev, const ArithShare& x, int kmin, int kmax,
                      int iterations) {
  auto norm = normalize_pow2(ev, x, kmin, kmax, false);
  const size_t n = x.size();
  // w0 = 2.9142 - 2x' for x' in [0.5, 1).
  ArithShare w = ev.add_public(ev.mul_public(norm.value, (0 - uint64_t{2}) & ev.mask(), 0),
                               ev.enc(2.9142));
  ArithShare err =
      ev.add_public(negate(ev, ev.mul_fx(norm.value, w)), ev.enc(1.0));
  for (int i = 0; i < iterations; ++i) {
    ArithShare one_plus = ev.add_public(err, ev.enc(1.0));
    if (i + 1 == iterations) {
      w = ev.mul_fx(w, one_plus);
      break;
    }
    ArithShare lhs[2] = {w, err};
    ArithShare rhs[2] = {one_plus, err};
    ArithShare both = ev.mul_fx(concat(lhs), concat(rhs));
    w = slice(both, 0, n);
    err = slice(both, n, n);
  }
  return ev.mul_fx(w, norm.factor);
}

ArithShare rsqrt(Evaluator& ev, const ArithShare& x, int kmin, int kmax,
                 int iterations) {
  auto norm = normalize_pow2(ev, x, kmin, kmax, true);
  const ArithShare& v = norm.value;
  // y0 = 1.8 - 0.8 v' for v' in [0.5, 1).
  ArithShare y = ev.add_public(
      ev.rescale(ev.mul_public(v, ev.enc(-0.8), ev.scale())), ev.enc(1.8));
  for (int i = 0; i < iterations; ++i) {
    ArithShare y2 = ev.mul_fx(y, y);
    ArithShare half_vy2 = ev.trunc(ev.mul_fx(v, y2), 1);
    ArithShare h = ev.add_public(negate(ev, half_vy2), ev.enc(1.5));
    y = ev.mul_fx(y, h);
  }
  return ev.mul_fx(y, norm.sqrt_factor);
}

// ---------------------------------------------------------------------------
// Row operations

ArithShare softmax(Evaluator& ev, const ArithShare& x, size_t rows,
                   size_t cols, const ExpSpec& spec) {
  SECMOE_ENFORCE(cols >= 1 && x.size() == rows * cols,
                 ErrorCode::kDimensionMismatch,
                 "softmax of {} values as {}x{}", x.size(), rows, cols);
  auto mx = topk(ev, x, rows, cols, 1, false).max;
  ArithShare d = ev.sub(x, broadcast_rows(mx, cols));
  ArithShare e = exp_neg(ev, d, spec);
  ArithShare sum = row_sums(e, rows, cols);
  // The row maximum contributes exp(0) = 1, so 1 <= sum <= cols.
  const int kmax = static_cast<int>(std::ceil(std::log2(static_cast<double>(cols)))) + 1;
  ArithShare inv = reciprocal(ev, sum, 1, kmax);
  return ev.mul_fx(e, broadcast_rows(inv, cols));
}

ArithShare layernorm(Evaluator& ev, const ArithShare& x, size_t rows,
                     size_t cols, const std::vector<uint64_t>& gamma,
                     const std::vector<uint64_t>& beta) {
  SECMOE_ENFORCE(cols >= 2 && x.size() == rows * cols,
                 ErrorCode::kDimensionMismatch,
                 "layernorm of {} values as {}x{}", x.size(), rows, cols);
  SECMOE_ENFORCE(gamma.size() == cols && beta.size() == cols,
                 ErrorCode::kDimensionMismatch,
                 "layernorm parameters of length {} and {} for width {}",
                 gamma.size(), beta.size(), cols);
  const uint64_t inv_d = ev.enc(1.0 / static_cast<double>(cols));
  ArithShare mean = ev.rescale(ev.mul_public(row_sums(x, rows, cols), inv_d, ev.scale()));
  ArithShare centered = ev.sub(x, broadcast_rows(mean, cols));
  ArithShare sq = ev.mul_fx(centered, centered);
  ArithShare var = ev.rescale(ev.mul_public(row_sums(sq, rows, cols), inv_d, ev.scale()));
  var = ev.add_public(var, ev.enc(kLayerNormEpsilon));
  ArithShare r = rsqrt(ev, var, -11, 16);
  ArithShare normed = ev.mul_fx(centered, broadcast_rows(r, cols));

  std::vector<uint64_t> g(rows * cols), b(rows * cols);
  for (size_t i = 0; i < rows; ++i)
    for (size_t j = 0; j < cols; ++j) {
      g[i * cols + j] = gamma[j];
      b[i * cols + j] = beta[j];
    }
  ArithShare scaled = ev.mul_fx(normed, ev.owned(Role::kServer, g, ev.scale()));
  return ev.add(scaled, ev.owned(Role::kServer, b, ev.scale()));
}

TopkResult topk(Evaluator& ev, const ArithShare& scores, size_t rows,
                size_t cols, size_t k, bool with_onehot) {
  SECMOE_ENFORCE(k == 1, ErrorCode::kUnsupportedK,
                 "only top-1 selection is supported, got k={}", k);
  SECMOE_ENFORCE(cols >= 1 && scores.size() == rows * cols,
                 ErrorCode::kDimensionMismatch,
                 "top-k over {} values as {}x{}", scores.size(), rows, cols);
  struct Node {
    uint64_t value;
    BitVec onehot;
  };
  std::vector<std::vector<Node>> nodes(rows);
  BitVec ones = with_onehot ? ev.public_bits(rows * cols, true) : BitVec();
  for (size_t r = 0; r < rows; ++r)
    for (size_t c = 0; c < cols; ++c)
      nodes[r].push_back({scores.v[r * cols + c],
                          with_onehot ? ones.slice(r * cols + c, 1) : BitVec()});

  for (;;) {
    std::vector<uint64_t> lv, rv;
    for (const auto& row : nodes)
      for (size_t j = 0; j + 1 < row.size(); j += 2) {
        lv.push_back(row[j].value);
        rv.push_back(row[j + 1].value);
      }
    if (lv.empty()) break;
    ArithShare left(std::move(lv), scores.frac);
    ArithShare right(std::move(rv), scores.frac);
    ArithShare diff = ev.sub(left, right);
    BitVec left_wins = ev.not_bits(ev.msb(diff));
    ArithShare best = ev.add(right, ev.mux(left_wins, diff));

    BitVec merged;
    if (with_onehot) {
      BitVec right_wins = ev.not_bits(left_wins);
      std::vector<BitVec> xs, ys;
      size_t pair = 0;
      for (const auto& row : nodes)
        for (size_t j = 0; j + 1 < row.size(); j += 2, ++pair) {
          xs.push_back(row[j].onehot);
          ys.push_back(BitVec(row[j].onehot.size(), left_wins.get(pair)));
          xs.push_back(row[j + 1].onehot);
          ys.push_back(BitVec(row[j + 1].onehot.size(), right_wins.get(pair)));
        }
      merged = ev.and_bits(BitVec::concat(xs), BitVec::concat(ys));
    }

    std::vector<std::vector<Node>> next(rows);
    size_t pair = 0, off = 0;
    for (size_t r = 0; r < rows; ++r) {
      auto& row = nodes[r];
      for (size_t j = 0; j + 1 < row.size(); j += 2, ++pair) {
        Node nd{best.v[pair], BitVec()};
        if (with_onehot) {
          const size_t len = row[j].onehot.size() + row[j + 1].onehot.size();
          nd.onehot = merged.slice(off, len);
          off += len;
        }
        next[r].push_back(std::move(nd));
      }
      if (row.size() % 2 == 1) next[r].push_back(std::move(row.back()));
    }
    nodes = std::move(next);
  }

  TopkResult out;
  out.max = ArithShare(std::vector<uint64_t>(rows), scores.frac);
  for (size_t r = 0; r < rows; ++r) {
    out.max.v[r] = nodes[r][0].value;
    if (with_onehot) out.onehot.append(nodes[r][0].onehot);
  }
  return out;
}

}  // namespace secmoe
