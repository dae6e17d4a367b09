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
#include <span>
#include <string>
#include <vector>

#include "secmoe/common.h"

namespace secmoe {

// Fixed-point encoding over Z_{2^ell}: a real v is stored as
// round(v * 2^scale) mod 2^ell, two's complement for negatives.
struct FixedConfig {
  int ell = 64;
  int scale = 18;

  void validate() const;
  uint64_t mask() const {
    return ell >= 64 ? ~uint64_t{0} : ((uint64_t{1} << ell) - 1);
  }
  double ulp() const { return 1.0 / static_cast<double>(uint64_t{1} << scale); }

  bool operator==(const FixedConfig&) const = default;
};

inline uint64_t ring_mask(int ell) {
  return ell >= 64 ? ~uint64_t{0} : ((uint64_t{1} << ell) - 1);
}

inline uint64_t wrap(uint64_t v, int ell) { return v & ring_mask(ell); }

inline int64_t to_signed(uint64_t v, int ell) {
  if (ell >= 64) return static_cast<int64_t>(v);
  v &= ring_mask(ell);
  uint64_t sign = uint64_t{1} << (ell - 1);
  return static_cast<int64_t>(v ^ sign) - static_cast<int64_t>(sign);
}

inline uint64_t from_signed(int64_t v, int ell) {
  return static_cast<uint64_t>(v) & ring_mask(ell);
}

inline bool msb(uint64_t v, int ell) { return (v >> (ell - 1)) & 1; }

// Encodes with round-half-away-from-zero. Throws kOverflow when
// |value| >= 2^(ell - scale - 1).
uint64_t encode(double value, const FixedConfig& cfg);
double decode(uint64_t e, const FixedConfig& cfg);

// Arithmetic right shift of the two's-complement interpretation.
uint64_t truncate_plain(uint64_t e, int shift, int ell);

// Plaintext reference for a fixed-point product: ring product then one
// truncation by the scale.
inline uint64_t mul_fx(uint64_t a, uint64_t b, const FixedConfig& cfg) {
  return truncate_plain(wrap(a * b, cfg.ell), cfg.scale, cfg.ell);
}

using Shape = std::vector<size_t>;

size_t shape_numel(const Shape& dims);
std::string shape_str(const Shape& dims);

// Row-major tensor of ring elements.
class FixedTensor {
 public:
  FixedTensor() = default;
  FixedTensor(Shape dims, FixedConfig cfg);
  FixedTensor(Shape dims, std::vector<uint64_t> data, FixedConfig cfg);

  static FixedTensor from_reals(Shape dims, std::span<const double> values,
                                FixedConfig cfg);
  std::vector<double> to_reals() const;

  const Shape& dims() const { return dims_; }
  size_t size() const { return data_.size(); }
  size_t rank() const { return dims_.size(); }
  size_t rows() const;
  size_t cols() const;
  const FixedConfig& config() const { return cfg_; }

  uint64_t& operator[](size_t i) { return data_[i]; }
  uint64_t operator[](size_t i) const { return data_[i]; }
  uint64_t& at(size_t r, size_t c) { return data_[r * cols() + c]; }
  uint64_t at(size_t r, size_t c) const { return data_[r * cols() + c]; }

  std::span<uint64_t> data() { return data_; }
  std::span<const uint64_t> data() const { return data_; }
  std::vector<uint64_t>& raw() { return data_; }
  const std::vector<uint64_t>& raw() const { return data_; }

  FixedTensor reshaped(Shape dims) const;
  FixedTensor transposed() const;
  // Rows [begin, end) of a rank-2 tensor.
  FixedTensor row_slice(size_t begin, size_t end) const;
  // Columns [begin, end) of a rank-2 tensor.
  FixedTensor col_slice(size_t begin, size_t end) const;

  bool operator==(const FixedTensor& o) const {
    return dims_ == o.dims_ && data_ == o.data_ && cfg_ == o.cfg_;
  }

 private:
  Shape dims_;
  std::vector<uint64_t> data_;
  FixedConfig cfg_;
};

// Ring-level helpers, all modulo 2^ell.
FixedTensor ring_add(const FixedTensor& a, const FixedTensor& b);
FixedTensor ring_sub(const FixedTensor& a, const FixedTensor& b);
FixedTensor ring_mul(const FixedTensor& a, const FixedTensor& b);
// (k x m) * (m x n) without truncation.
FixedTensor ring_matmul(const FixedTensor& a, const FixedTensor& b);
FixedTensor truncate_plain(const FixedTensor& a, int shift);
// Concatenates rank-2 tensors along columns.
FixedTensor concat_cols(std::span<const FixedTensor> parts);

void check_same_dims(const Shape& a, const Shape& b, std::string_view what);

}  // namespace secmoe
