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

#include "secmoe/evaluator.h"

namespace secmoe {

// Piecewise polynomial over half-open segments (b_i, b_{i+1}]. Row r of
// `coeffs` holds segment r's coefficients in ascending order, zero padded to
// a common degree.
struct PiecewiseSpec {
  std::vector<double> breakpoints;
  std::vector<std::vector<double>> coeffs;

  size_t segments() const { return coeffs.size(); }
  size_t degree() const { return coeffs.empty() ? 0 : coeffs[0].size() - 1; }
  size_t nonzero_count() const;
  // Index of the segment containing x.
  size_t segment_of(double x) const;
  void validate() const;
};

// The six-segment quadratic GeLU fit on [-5, 3].
PiecewiseSpec gelu_spec();

// exp(x) for x <= 0 as (1 + x / 2^iterations)^(2^iterations), zero below
// the threshold.
struct ExpSpec {
  double threshold = -13.0;
  int iterations = 6;
  void validate() const;
};

// Real-valued evaluation of the piecewise fit.
double gelu_plain(double x, const PiecewiseSpec& spec = gelu_spec());
// x * Phi(x).
double gelu_exact(double x);

// Select-then-compute: comparisons select each coefficient column through
// public-value MUXes (zero entries skipped), then a single polynomial of
// the common degree is evaluated.
ArithShare gelu(Evaluator& ev, const ArithShare& x,
                const PiecewiseSpec& spec = gelu_spec());
// Baseline: every segment polynomial evaluated on x with secure products,
// then each result gated by its segment indicator.
ArithShare naive_piecewise_gelu(Evaluator& ev, const ArithShare& x,
                                const PiecewiseSpec& spec = gelu_spec());

// Boolean one-hot segment indicators, one BitVec per segment.
std::vector<BitVec> segment_indicators(Evaluator& ev, const ArithShare& x,
                                       const PiecewiseSpec& spec);

ArithShare exp_neg(Evaluator& ev, const ArithShare& x,
                   const ExpSpec& spec = {});

// Scales positive x by 2^-k so the result lands in [0.5, 1), where
// 2^(k-1) <= x < 2^k, k clamped to [kmin, kmax]. Returns the normalized value
// and the factor 2^-k; with `with_sqrt`, also 2^(-k/2).
struct Pow2Normalized {
  ArithShare value;
  ArithShare factor;
  ArithShare sqrt_factor;
};
Pow2Normalized normalize_pow2(Evaluator& ev, const ArithShare& x, int kmin,
                              int kmax, bool with_sqrt);

// 1/x for x in [2^(kmin-1), 2^kmax) via Goldschmidt iterations.
ArithShare reciprocal(Evaluator& ev, const ArithShare& x, int kmin, int kmax,
                      int iterations = 2);
// 1/sqrt(x) for x in [2^(kmin-1), 2^kmax) via Newton iterations.
ArithShare rsqrt(Evaluator& ev, const ArithShare& x, int kmin, int kmax,
                 int iterations = 3);

// Row-wise softmax of a rows x cols matrix.
ArithShare softmax(Evaluator& ev, const ArithShare& x, size_t rows,
                   size_t cols, const ExpSpec& spec = {});

// Variance floor added before the inverse square root.
inline constexpr double kLayerNormEpsilon = 1.0 / 4096.0;

// Row-wise LayerNorm. gamma and beta (length cols, encoded) belong to the
// server; other parties pass vectors of the right length.
ArithShare layernorm(Evaluator& ev, const ArithShare& x, size_t rows,
                     size_t cols, const std::vector<uint64_t>& gamma,
                     const std::vector<uint64_t>& beta);

// Largest entry of each row and its one-hot position; ties go to the lowest
// index. The comparison takes the sign of the difference of two entries, so
// entries must differ by less than 2^(ell-1) in the ring.
struct TopkResult {
  ArithShare max;  // rows
  BitVec onehot;   // rows x cols
};
TopkResult topk(Evaluator& ev, const ArithShare& scores, size_t rows,
                size_t cols, size_t k = 1, bool with_onehot = true);

}  // namespace secmoe
