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
#include <functional>
#include <span>
#include <vector>

#include "secmoe/he.h"

namespace secmoe::he {

// Coefficient packing for a k x m by m x n product inside one polynomial of
// degree N (k*m*n <= N):
//   left   x[i*m*n + (m-1) - j] = X(i, j)
//   right  w[j*m + i]           = W(i, j)
//   entry (i, j) of X*W sits at coefficient i*m*n + j*m + (m-1).
Plaintext encode_left(std::span<const uint64_t> x, size_t k, size_t m,
                      size_t n, size_t degree);
Plaintext encode_right(std::span<const uint64_t> w, size_t m, size_t n,
                       size_t degree);
std::vector<uint64_t> matmul_extract(const Plaintext& product, size_t k,
                                     size_t m, size_t n);
// Coefficient index holding output entry (i, j).
inline size_t extract_index(size_t i, size_t j, size_t m, size_t n) {
  return i * m * n + j * m + (m - 1);
}

// Tiling of a k x m by m x n product into blocks that each fit one
// polynomial. Output blocks accumulate over the inner dimension.
struct MatmulPlan {
  size_t k = 0, m = 0, n = 0;
  size_t kb = 0, mb = 0, nb = 0;

  // Fewest input plus output ciphertexts; ties go to fewer outputs.
  static MatmulPlan choose(size_t k, size_t m, size_t n, size_t degree);
  static MatmulPlan fixed(size_t k, size_t m, size_t n, size_t kb, size_t mb,
                          size_t nb, size_t degree);

  size_t k_blocks() const { return (k + kb - 1) / kb; }
  size_t m_blocks() const { return (m + mb - 1) / mb; }
  size_t n_blocks() const { return (n + nb - 1) / nb; }
  size_t num_inputs() const { return k_blocks() * m_blocks(); }
  size_t num_outputs() const { return k_blocks() * n_blocks(); }

  // Block extents (the last block along an axis may be short).
  size_t k_len(size_t bi) const { return std::min(kb, k - bi * kb); }
  size_t m_len(size_t bm) const { return std::min(mb, m - bm * mb); }
  size_t n_len(size_t bj) const { return std::min(nb, n - bj * nb); }

  // Encodes the left operand blocks, indexed bi * m_blocks() + bm.
  std::vector<Plaintext> encode_inputs(std::span<const uint64_t> x,
                                       size_t degree) const;
  // Encodes the right operand blocks, indexed bm * n_blocks() + bj.
  std::vector<Plaintext> encode_weights(std::span<const uint64_t> w,
                                        size_t degree) const;
  // Coefficient positions of the output blocks, indexed bi * n_blocks() + bj,
  // as (flat output index, coefficient index) pairs.
  void for_each_output(
      size_t bi, size_t bj,
      const std::function<void(size_t out_index, size_t coeff)>& fn) const;
};

}  // namespace secmoe::he
