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

#include <functional>

#include "secmoe/he_matmul.h"

namespace secmoe::he {

namespace {

void check_capacity(size_t k, size_t m, size_t n, size_t degree) {
  SECMOE_ENFORCE(k > 0 && m > 0 && n > 0, ErrorCode::kDimensionMismatch,
                 "empty matmul {}x{}x{}", k, m, n);
  SECMOE_ENFORCE(k * m * n <= degree, ErrorCode::kDimensionMismatch,
                 "matmul block {}x{}x{} needs {} coefficients, ring has {}", k,
                 m, n, k * m * n, degree);
}

}  // namespace

Plaintext encode_left(std::span<const uint64_t> x, size_t k, size_t m,
                      size_t n, size_t degree) {
  check_capacity(k, m, n, degree);
  SECMOE_ENFORCE(x.size() == k * m, ErrorCode::kDimensionMismatch,
                 "left operand has {} entries, expected {}x{}", x.size(), k, m);
  Plaintext p(degree);
  for (size_t i = 0; i < k; ++i)
    for (size_t j = 0; j < m; ++j) p.coeffs[i * m * n + (m - 1) - j] = x[i * m + j];
  return p;
}

Plaintext encode_right(std::span<const uint64_t> w, size_t m, size_t n,
                       size_t degree) {
  check_capacity(1, m, n, degree);
  SECMOE_ENFORCE(w.size() == m * n, ErrorCode::kDimensionMismatch,
                 "right operand has {} entries, expected {}x{}", w.size(), m,
                 n);
  Plaintext p(degree);
  for (size_t i = 0; i < m; ++i)
    for (size_t j = 0; j < n; ++j) p.coeffs[j * m + i] = w[i * n + j];
  return p;
}

std::vector<uint64_t> matmul_extract(const Plaintext& product, size_t k,
                                     size_t m, size_t n) {
  check_capacity(k, m, n, product.degree());
  std::vector<uint64_t> out(k * n);
  for (size_t i = 0; i < k; ++i)
    for (size_t j = 0; j < n; ++j)
      out[i * n + j] = product.coeffs[extract_index(i, j, m, n)];
  return out;
}

MatmulPlan MatmulPlan::fixed(size_t k, size_t m, size_t n, size_t kb, size_t mb,
                             size_t nb, size_t degree) {
  SECMOE_ENFORCE(kb >= 1 && mb >= 1 && nb >= 1 && kb <= k && mb <= m &&
                     nb <= n,
                 ErrorCode::kDimensionMismatch,
                 "block {}x{}x{} does not tile {}x{}x{}", kb, mb, nb, k, m, n);
  check_capacity(kb, mb, nb, degree);
  return {k, m, n, kb, mb, nb};
}

MatmulPlan MatmulPlan::choose(size_t k, size_t m, size_t n, size_t degree) {
  SECMOE_ENFORCE(k > 0 && m > 0 && n > 0, ErrorCode::kDimensionMismatch,
                 "empty matmul {}x{}x{}", k, m, n);
  MatmulPlan best;
  size_t best_cost = ~size_t{0}, best_out = ~size_t{0};
  for (size_t kb = 1; kb <= k; ++kb) {
    for (size_t mb = 1; mb <= m && kb * mb <= degree; ++mb) {
      const size_t nb = std::min(n, degree / (kb * mb));
      if (nb == 0) continue;
      MatmulPlan p{k, m, n, kb, mb, nb};
      const size_t cost = p.num_inputs() + p.num_outputs();
      if (cost < best_cost ||
          (cost == best_cost && p.num_outputs() < best_out)) {
        best = p;
        best_cost = cost;
        best_out = p.num_outputs();
      }
    }
  }
  return best;
}

// Every block is encoded with the full strides (mb, nb) and zero padding, so
// products of short edge blocks land on the same coefficients as full ones
// and can be summed over the inner dimension.
std::vector<Plaintext> MatmulPlan::encode_inputs(std::span<const uint64_t> x,
                                                 size_t degree) const {
  SECMOE_ENFORCE(x.size() == k * m, ErrorCode::kDimensionMismatch,
                 "input has {} entries, expected {}x{}", x.size(), k, m);
  std::vector<Plaintext> out;
  out.reserve(num_inputs());
  for (size_t bi = 0; bi < k_blocks(); ++bi) {
    for (size_t bm = 0; bm < m_blocks(); ++bm) {
      Plaintext p(degree);
      const size_t kl = k_len(bi), ml = m_len(bm);
      for (size_t i = 0; i < kl; ++i)
        for (size_t j = 0; j < ml; ++j)
          p.coeffs[i * mb * nb + (mb - 1) - j] =
              x[(bi * kb + i) * m + bm * mb + j];
      out.push_back(std::move(p));
    }
  }
  return out;
}

std::vector<Plaintext> MatmulPlan::encode_weights(std::span<const uint64_t> w,
                                                  size_t degree) const {
  SECMOE_ENFORCE(w.size() == m * n, ErrorCode::kDimensionMismatch,
                 "weight has {} entries, expected {}x{}", w.size(), m, n);
  std::vector<Plaintext> out;
  out.reserve(m_blocks() * n_blocks());
  for (size_t bm = 0; bm < m_blocks(); ++bm) {
    for (size_t bj = 0; bj < n_blocks(); ++bj) {
      Plaintext p(degree);
      const size_t ml = m_len(bm), nl = n_len(bj);
      for (size_t i = 0; i < ml; ++i)
        for (size_t j = 0; j < nl; ++j)
          p.coeffs[j * mb + i] = w[(bm * mb + i) * n + bj * nb + j];
      out.push_back(std::move(p));
    }
  }
  return out;
}

void MatmulPlan::for_each_output(
    size_t bi, size_t bj,
    const std::function<void(size_t, size_t)>& fn) const {
  const size_t kl = k_len(bi), nl = n_len(bj);
  for (size_t i = 0; i < kl; ++i)
    for (size_t j = 0; j < nl; ++j)
      fn((bi * kb + i) * n + bj * nb + j, extract_index(i, j, mb, nb));
}

}  // namespace secmoe::he
