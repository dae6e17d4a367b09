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

#include "secmoe/bitvec.h"

#include <bit>
#include <cstring>

#include "secmoe/common.h"

namespace secmoe {

BitVec::BitVec(size_t n, bool value)
    : words_((n + 63) / 64, value ? ~uint64_t{0} : 0), n_(n) {
  clear_tail();
}

void BitVec::clear_tail() {
  if (n_ % 64 != 0 && !words_.empty()) {
    words_.back() &= (uint64_t{1} << (n_ % 64)) - 1;
  }
}

void BitVec::push_back(bool v) {
  if (n_ % 64 == 0) words_.push_back(0);
  ++n_;
  set(n_ - 1, v);
}

BitVec& BitVec::operator^=(const BitVec& o) {
  SECMOE_ENFORCE(n_ == o.n_, ErrorCode::kDimensionMismatch,
                 "bitvec xor {} vs {}", n_, o.n_);
  for (size_t i = 0; i < words_.size(); ++i) words_[i] ^= o.words_[i];
  return *this;
}

BitVec& BitVec::operator&=(const BitVec& o) {
  SECMOE_ENFORCE(n_ == o.n_, ErrorCode::kDimensionMismatch,
                 "bitvec and {} vs {}", n_, o.n_);
  for (size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
  return *this;
}

BitVec BitVec::operator~() const {
  BitVec out = *this;
  for (auto& w : out.words_) w = ~w;
  out.clear_tail();
  return out;
}

BitVec BitVec::slice(size_t begin, size_t len) const {
  SECMOE_ENFORCE(begin + len <= n_, ErrorCode::kDimensionMismatch,
                 "bitvec slice [{}, +{}) of {}", begin, len, n_);
  BitVec out(len);
  if (begin % 64 == 0) {
    std::memcpy(out.words_.data(), words_.data() + begin / 64,
                out.words_.size() * 8);
    out.clear_tail();
    return out;
  }
  const size_t shift = begin % 64;
  for (size_t w = 0; w < out.words_.size(); ++w) {
    const size_t src = begin / 64 + w;
    uint64_t lo = words_[src] >> shift;
    uint64_t hi = src + 1 < words_.size() ? words_[src + 1] << (64 - shift) : 0;
    out.words_[w] = lo | hi;
  }
  out.clear_tail();
  return out;
}

void BitVec::append(const BitVec& o) {
  if (n_ % 64 == 0) {
    words_.insert(words_.end(), o.words_.begin(), o.words_.end());
    n_ += o.n_;
    return;
  }
  const size_t shift = n_ % 64;
  words_.resize((n_ + o.n_ + 63) / 64, 0);
  size_t base = n_ / 64;
  for (size_t w = 0; w < o.words_.size(); ++w) {
    words_[base + w] |= o.words_[w] << shift;
    if (base + w + 1 < words_.size())
      words_[base + w + 1] |= o.words_[w] >> (64 - shift);
  }
  n_ += o.n_;
  clear_tail();
}

BitVec BitVec::concat(std::span<const BitVec> parts) {
  BitVec out;
  size_t total = 0;
  for (const auto& p : parts) total += p.size();
  out.words_.reserve((total + 63) / 64);
  for (const auto& p : parts) out.append(p);
  return out;
}

size_t BitVec::popcount() const {
  size_t c = 0;
  for (auto w : words_) c += std::popcount(w);
  return c;
}

std::vector<uint8_t> BitVec::to_bytes() const {
  std::vector<uint8_t> out((n_ + 7) / 8);
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<uint8_t>(words_[i / 8] >> (8 * (i % 8)));
  return out;
}

BitVec BitVec::from_words(std::vector<uint64_t> words, size_t n) {
  SECMOE_ENFORCE(words.size() == (n + 63) / 64, ErrorCode::kDimensionMismatch,
                 "{} words for {} bits", words.size(), n);
  BitVec out;
  out.words_ = std::move(words);
  out.n_ = n;
  out.clear_tail();
  return out;
}

BitVec BitVec::from_bytes(std::span<const uint8_t> bytes, size_t n) {
  SECMOE_ENFORCE(bytes.size() == (n + 7) / 8, ErrorCode::kProtocol,
                 "bit payload of {} bytes for {} bits", bytes.size(), n);
  BitVec out(n);
  for (size_t i = 0; i < bytes.size(); ++i)
    out.words_[i / 8] |= uint64_t{bytes[i]} << (8 * (i % 8));
  out.clear_tail();
  return out;
}

}  // namespace secmoe
