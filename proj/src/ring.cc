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

#include "secmoe/ring.h"

#include <cmath>
#include <numeric>

namespace secmoe {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOverflow: return "overflow";
    case ErrorCode::kRandomnessExhausted: return "randomness-exhausted";
    case ErrorCode::kDimensionMismatch: return "dimension-mismatch";
    case ErrorCode::kLevelExceeded: return "level-exceeded";
    case ErrorCode::kEngineUnsupported: return "engine-unsupported";
    case ErrorCode::kUnsupportedK: return "unsupported-k";
    case ErrorCode::kInvalidConfig: return "invalid-config";
    case ErrorCode::kProtocol: return "protocol";
    case ErrorCode::kConnectionRefused: return "connection-refused";
    case ErrorCode::kTimeout: return "timeout";
    case ErrorCode::kChannelClosed: return "channel-closed";
    case ErrorCode::kMalformedFile: return "malformed-file";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kParameter: return "parameter";
    case ErrorCode::kScaleMismatch: return "scale-mismatch";
  }
  return "unknown";
}

void FixedConfig::validate() const {
  SECMOE_ENFORCE(ell >= 2 && ell <= 64, ErrorCode::kInvalidConfig,
                 "ring width {} outside [2, 64]", ell);
  SECMOE_ENFORCE(scale > 0 && scale < ell, ErrorCode::kInvalidConfig,
                 "scale {} must satisfy 0 < scale < ell={}", scale, ell);
}

uint64_t encode(double value, const FixedConfig& cfg) {
  const double bound = std::ldexp(1.0, cfg.ell - cfg.scale - 1);
  SECMOE_ENFORCE(std::isfinite(value) && std::fabs(value) < bound,
                 ErrorCode::kOverflow,
                 "value {} not representable with ell={} scale={}", value,
                 cfg.ell, cfg.scale);
  // std::round rounds half away from zero.
  const double scaled = std::round(std::ldexp(value, cfg.scale));
  return from_signed(static_cast<int64_t>(scaled), cfg.ell);
}

double decode(uint64_t e, const FixedConfig& cfg) {
  return std::ldexp(static_cast<double>(to_signed(e, cfg.ell)), -cfg.scale);
}

uint64_t truncate_plain(uint64_t e, int shift, int ell) {
  return from_signed(to_signed(e, ell) >> shift, ell);
}

size_t shape_numel(const Shape& dims) {
  return std::accumulate(dims.begin(), dims.end(), size_t{1},
                         std::multiplies<>());
}

std::string shape_str(const Shape& dims) {
  return fmt::format("[{}]", fmt::join(dims, "x"));
}

void check_same_dims(const Shape& a, const Shape& b, std::string_view what) {
  SECMOE_ENFORCE(a == b, ErrorCode::kDimensionMismatch, "{}: {} vs {}", what,
                 shape_str(a), shape_str(b));
}

FixedTensor::FixedTensor(Shape dims, FixedConfig cfg)
    : dims_(std::move(dims)), data_(shape_numel(dims_), 0), cfg_(cfg) {}

FixedTensor::FixedTensor(Shape dims, std::vector<uint64_t> data,
                         FixedConfig cfg)
    : dims_(std::move(dims)), data_(std::move(data)), cfg_(cfg) {
  SECMOE_ENFORCE(data_.size() == shape_numel(dims_),
                 ErrorCode::kDimensionMismatch,
                 "tensor data length {} does not match dims {}", data_.size(),
                 shape_str(dims_));
  const uint64_t m = cfg_.mask();
  for (auto& v : data_) v &= m;
}

FixedTensor FixedTensor::from_reals(Shape dims, std::span<const double> values,
                                    FixedConfig cfg) {
  SECMOE_ENFORCE(values.size() == shape_numel(dims),
                 ErrorCode::kDimensionMismatch,
                 "{} values for dims {}", values.size(), shape_str(dims));
  std::vector<uint64_t> data(values.size());
  for (size_t i = 0; i < values.size(); ++i) data[i] = encode(values[i], cfg);
  return FixedTensor(std::move(dims), std::move(data), cfg);
}

std::vector<double> FixedTensor::to_reals() const {
  std::vector<double> out(data_.size());
  for (size_t i = 0; i < data_.size(); ++i) out[i] = decode(data_[i], cfg_);
  return out;
}

size_t FixedTensor::rows() const {
  SECMOE_ENFORCE(dims_.size() == 2, ErrorCode::kDimensionMismatch,
                 "rows() on rank-{} tensor", dims_.size());
  return dims_[0];
}

size_t FixedTensor::cols() const {
  SECMOE_ENFORCE(dims_.size() == 2, ErrorCode::kDimensionMismatch,
                 "cols() on rank-{} tensor", dims_.size());
  return dims_[1];
}

FixedTensor FixedTensor::reshaped(Shape dims) const {
  SECMOE_ENFORCE(shape_numel(dims) == data_.size(),
                 ErrorCode::kDimensionMismatch, "cannot reshape {} to {}",
                 shape_str(dims_), shape_str(dims));
  FixedTensor out = *this;
  out.dims_ = std::move(dims);
  return out;
}

FixedTensor FixedTensor::transposed() const {
  const size_t r = rows(), c = cols();
  FixedTensor out({c, r}, cfg_);
  for (size_t i = 0; i < r; ++i)
    for (size_t j = 0; j < c; ++j) out.data_[j * r + i] = data_[i * c + j];
  return out;
}

FixedTensor FixedTensor::row_slice(size_t begin, size_t end) const {
  const size_t c = cols();
  SECMOE_ENFORCE(begin <= end && end <= rows(), ErrorCode::kDimensionMismatch,
                 "row slice [{}, {}) of {}", begin, end, shape_str(dims_));
  std::vector<uint64_t> d(data_.begin() + begin * c, data_.begin() + end * c);
  return FixedTensor({end - begin, c}, std::move(d), cfg_);
}

FixedTensor FixedTensor::col_slice(size_t begin, size_t end) const {
  const size_t r = rows(), c = cols();
  SECMOE_ENFORCE(begin <= end && end <= c, ErrorCode::kDimensionMismatch,
                 "col slice [{}, {}) of {}", begin, end, shape_str(dims_));
  FixedTensor out({r, end - begin}, cfg_);
  for (size_t i = 0; i < r; ++i)
    for (size_t j = begin; j < end; ++j)
      out.data_[i * (end - begin) + (j - begin)] = data_[i * c + j];
  return out;
}

FixedTensor ring_add(const FixedTensor& a, const FixedTensor& b) {
  check_same_dims(a.dims(), b.dims(), "ring_add");
  FixedTensor out = a;
  const uint64_t m = a.config().mask();
  for (size_t i = 0; i < out.size(); ++i) out[i] = (a[i] + b[i]) & m;
  return out;
}

FixedTensor ring_sub(const FixedTensor& a, const FixedTensor& b) {
  check_same_dims(a.dims(), b.dims(), "ring_sub");
  FixedTensor out = a;
  const uint64_t m = a.config().mask();
  for (size_t i = 0; i < out.size(); ++i) out[i] = (a[i] - b[i]) & m;
  return out;
}

FixedTensor ring_mul(const FixedTensor& a, const FixedTensor& b) {
  check_same_dims(a.dims(), b.dims(), "ring_mul");
  FixedTensor out = a;
  const uint64_t m = a.config().mask();
  for (size_t i = 0; i < out.size(); ++i) out[i] = (a[i] * b[i]) & m;
  return out;
}

FixedTensor ring_matmul(const FixedTensor& a, const FixedTensor& b) {
  const size_t k = a.rows(), m = a.cols(), n = b.cols();
  SECMOE_ENFORCE(b.rows() == m, ErrorCode::kDimensionMismatch,
                 "matmul {} * {}", shape_str(a.dims()), shape_str(b.dims()));
  FixedTensor out({k, n}, a.config());
  const uint64_t mask = a.config().mask();
  for (size_t i = 0; i < k; ++i) {
    for (size_t l = 0; l < m; ++l) {
      const uint64_t x = a[i * m + l];
      if (x == 0) continue;
      const uint64_t* brow = b.data().data() + l * n;
      uint64_t* orow = out.data().data() + i * n;
      for (size_t j = 0; j < n; ++j) orow[j] += x * brow[j];
    }
  }
  for (auto& v : out.raw()) v &= mask;
  return out;
}

FixedTensor truncate_plain(const FixedTensor& a, int shift) {
  FixedTensor out = a;
  for (auto& v : out.raw()) v = truncate_plain(v, shift, a.config().ell);
  return out;
}

FixedTensor concat_cols(std::span<const FixedTensor> parts) {
  SECMOE_ENFORCE(!parts.empty(), ErrorCode::kDimensionMismatch,
                 "concat of nothing");
  const size_t r = parts[0].rows();
  size_t c = 0;
  for (const auto& p : parts) {
    SECMOE_ENFORCE(p.rows() == r, ErrorCode::kDimensionMismatch,
                   "concat row mismatch");
    c += p.cols();
  }
  FixedTensor out({r, c}, parts[0].config());
  size_t off = 0;
  for (const auto& p : parts) {
    for (size_t i = 0; i < r; ++i)
      for (size_t j = 0; j < p.cols(); ++j) out.at(i, off + j) = p.at(i, j);
    off += p.cols();
  }
  return out;
}

}  // namespace secmoe
