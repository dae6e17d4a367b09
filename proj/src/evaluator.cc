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

#include "secmoe/evaluator.h"

namespace secmoe {

namespace {

void same_size(size_t a, size_t b, const char* op) {
  SECMOE_ENFORCE(a == b, ErrorCode::kDimensionMismatch, "{}: {} vs {} elements",
                 op, a, b);
}

void same_frac(const ArithShare& a, const ArithShare& b, const char* op) {
  SECMOE_ENFORCE(a.frac == b.frac, ErrorCode::kScaleMismatch,
                 "{} of values with {} and {} fractional bits", op, a.frac,
                 b.frac);
}

}  // namespace

ArithShare Evaluator::rescale(const ArithShare& a, int extra) {
  const int s = scale();
  const int shift = a.frac - s + extra;
  SECMOE_ENFORCE(a.frac >= s && shift > 0, ErrorCode::kScaleMismatch,
                 "cannot rescale a value with {} fractional bits to {}",
                 a.frac, s);
  ArithShare out = trunc(a, shift);
  out.frac = s;
  return out;
}

PlainEvaluator::PlainEvaluator(FixedConfig cfg) : cfg_(cfg) { cfg_.validate(); }

ArithShare PlainEvaluator::add(const ArithShare& a, const ArithShare& b) {
  same_size(a.size(), b.size(), "add");
  same_frac(a, b, "add");
  ArithShare out = a;
  for (size_t i = 0; i < out.size(); ++i) out.v[i] = (out.v[i] + b.v[i]) & mask();
  return out;
}

ArithShare PlainEvaluator::sub(const ArithShare& a, const ArithShare& b) {
  same_size(a.size(), b.size(), "sub");
  same_frac(a, b, "sub");
  ArithShare out = a;
  for (size_t i = 0; i < out.size(); ++i) out.v[i] = (out.v[i] - b.v[i]) & mask();
  return out;
}

ArithShare PlainEvaluator::add_public(const ArithShare& a,
                                      std::span<const uint64_t> c) {
  same_size(a.size(), c.size(), "add_public");
  ArithShare out = a;
  for (size_t i = 0; i < out.size(); ++i) out.v[i] = (out.v[i] + c[i]) & mask();
  return out;
}

ArithShare PlainEvaluator::add_public(const ArithShare& a, uint64_t c) {
  ArithShare out = a;
  for (auto& x : out.v) x = (x + c) & mask();
  return out;
}

ArithShare PlainEvaluator::mul_public(const ArithShare& a,
                                      std::span<const uint64_t> c,
                                      int c_frac) {
  same_size(a.size(), c.size(), "mul_public");
  ArithShare out = a;
  out.frac += c_frac;
  for (size_t i = 0; i < out.size(); ++i) out.v[i] = (out.v[i] * c[i]) & mask();
  return out;
}

ArithShare PlainEvaluator::mul_public(const ArithShare& a, uint64_t c,
                                      int c_frac) {
  ArithShare out = a;
  out.frac += c_frac;
  for (auto& x : out.v) x = (x * c) & mask();
  return out;
}

ArithShare PlainEvaluator::input(Role, const std::vector<uint64_t>* values,
                                 size_t n, int frac) {
  SECMOE_ENFORCE(values != nullptr && values->size() == n,
                 ErrorCode::kDimensionMismatch,
                 "plaintext input needs {} values", n);
  ArithShare out(*values, frac);
  for (auto& x : out.v) x &= mask();
  return out;
}

ArithShare PlainEvaluator::mul(const ArithShare& a, const ArithShare& b) {
  same_size(a.size(), b.size(), "mul");
  counters_.mul += a.size();
  ArithShare out(std::vector<uint64_t>(a.size()), a.frac + b.frac);
  for (size_t i = 0; i < a.size(); ++i) out.v[i] = (a.v[i] * b.v[i]) & mask();
  return out;
}

ArithShare PlainEvaluator::trunc(const ArithShare& a, int shift) {
  SECMOE_ENFORCE(shift > 0 && shift < cfg_.ell, ErrorCode::kInvalidConfig,
                 "truncation by {} bits in a {}-bit ring", shift, cfg_.ell);
  counters_.trunc += a.size();
  ArithShare out = a;
  for (auto& x : out.v) x = truncate_plain(x, shift, cfg_.ell);
  return out;
}

BitVec PlainEvaluator::msb(const ArithShare& a) {
  counters_.msb += a.size();
  BitVec out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out.set(i, secmoe::msb(a.v[i], cfg_.ell));
  return out;
}

BitVec PlainEvaluator::and_bits(const BitVec& x, const BitVec& y) {
  same_size(x.size(), y.size(), "and_bits");
  counters_.and_bits += x.size();
  return x & y;
}

ArithShare PlainEvaluator::b2a(const BitVec& t) {
  counters_.b2a += t.size();
  ArithShare out(std::vector<uint64_t>(t.size()), 0);
  for (size_t i = 0; i < t.size(); ++i) out.v[i] = t.get(i);
  return out;
}

ArithShare PlainEvaluator::mux_public(const BitVec& sel,
                                      std::span<const uint64_t> values,
                                      int frac) {
  same_size(sel.size(), values.size(), "mux_public");
  counters_.mux_public += sel.size();
  ArithShare out(std::vector<uint64_t>(sel.size()), frac);
  for (size_t i = 0; i < sel.size(); ++i)
    out.v[i] = sel.get(i) ? (values[i] & mask()) : 0;
  return out;
}

ArithShare PlainEvaluator::mux(const BitVec& sel, const ArithShare& v) {
  same_size(sel.size(), v.size(), "mux");
  counters_.mux += sel.size();
  ArithShare out = v;
  for (size_t i = 0; i < sel.size(); ++i)
    if (!sel.get(i)) out.v[i] = 0;
  return out;
}

std::vector<BitVec> PlainEvaluator::less_than(
    const ArithShare& x, std::span<const uint64_t> thresholds) {
  counters_.compare += x.size() * thresholds.size();
  std::vector<BitVec> out;
  for (uint64_t t : thresholds) {
    const int64_t ts = to_signed(t, cfg_.ell);
    BitVec b(x.size());
    for (size_t i = 0; i < x.size(); ++i)
      b.set(i, to_signed(x.v[i], cfg_.ell) < ts);
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<ArithShare> PlainEvaluator::matmul(std::span<const ArithShare> a,
                                               std::span<const ArithShare> b,
                                               size_t k, size_t m, size_t n) {
  same_size(a.size(), b.size(), "matmul batch");
  counters_.matmul_ss += a.size();
  std::vector<ArithShare> out;
  for (size_t t = 0; t < a.size(); ++t) {
    same_size(a[t].size(), k * m, "matmul lhs");
    same_size(b[t].size(), m * n, "matmul rhs");
    std::vector<uint64_t> c(k * n, 0);
    for (size_t i = 0; i < k; ++i)
      for (size_t l = 0; l < m; ++l) {
        const uint64_t x = a[t].v[i * m + l];
        for (size_t j = 0; j < n; ++j) c[i * n + j] += x * b[t].v[l * n + j];
      }
    for (auto& x : c) x &= mask();
    out.emplace_back(std::move(c), a[t].frac + b[t].frac);
  }
  return out;
}

// --- layout helpers --------------------------------------------------------

ArithShare concat(std::span<const ArithShare> parts) {
  ArithShare out;
  if (parts.empty()) return out;
  out.frac = parts[0].frac;
  for (const auto& p : parts) {
    same_frac(out, p, "concat");
    out.v.insert(out.v.end(), p.v.begin(), p.v.end());
  }
  return out;
}

ArithShare slice(const ArithShare& a, size_t begin, size_t len) {
  SECMOE_ENFORCE(begin + len <= a.size(), ErrorCode::kDimensionMismatch,
                 "slice [{}, {}) of {} elements", begin, begin + len,
                 a.size());
  return {std::vector<uint64_t>(a.v.begin() + begin, a.v.begin() + begin + len),
          a.frac};
}

ArithShare broadcast_rows(const ArithShare& a, size_t cols) {
  ArithShare out(std::vector<uint64_t>(a.size() * cols), a.frac);
  for (size_t r = 0; r < a.size(); ++r)
    for (size_t c = 0; c < cols; ++c) out.v[r * cols + c] = a.v[r];
  return out;
}

BitVec broadcast_bits(const BitVec& a, size_t cols) {
  BitVec out(a.size() * cols);
  for (size_t r = 0; r < a.size(); ++r)
    if (a.get(r))
      for (size_t c = 0; c < cols; ++c) out.set(r * cols + c, true);
  return out;
}

ArithShare row_sums(const ArithShare& a, size_t rows, size_t cols) {
  same_size(a.size(), rows * cols, "row_sums");
  ArithShare out(std::vector<uint64_t>(rows, 0), a.frac);
  for (size_t r = 0; r < rows; ++r)
    for (size_t c = 0; c < cols; ++c) out.v[r] += a.v[r * cols + c];
  return out;
}

ArithShare transpose(const ArithShare& a, size_t rows, size_t cols) {
  same_size(a.size(), rows * cols, "transpose");
  ArithShare out(std::vector<uint64_t>(a.size()), a.frac);
  for (size_t r = 0; r < rows; ++r)
    for (size_t c = 0; c < cols; ++c) out.v[c * rows + r] = a.v[r * cols + c];
  return out;
}

ArithShare col_block(const ArithShare& a, size_t rows, size_t cols,
                     size_t begin, size_t len) {
  same_size(a.size(), rows * cols, "col_block");
  SECMOE_ENFORCE(begin + len <= cols, ErrorCode::kDimensionMismatch,
                 "columns [{}, {}) of {}", begin, begin + len, cols);
  ArithShare out(std::vector<uint64_t>(rows * len), a.frac);
  for (size_t r = 0; r < rows; ++r)
    for (size_t c = 0; c < len; ++c)
      out.v[r * len + c] = a.v[r * cols + begin + c];
  return out;
}

}  // namespace secmoe
