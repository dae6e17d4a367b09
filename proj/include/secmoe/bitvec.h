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
#include <vector>

namespace secmoe {

// Packed bit vector, little-endian within each 64-bit word. Bits past size()
// in the last word are kept at zero.
class BitVec {
 public:
  BitVec() = default;
  explicit BitVec(size_t n, bool value = false);

  size_t size() const { return n_; }
  bool empty() const { return n_ == 0; }

  bool get(size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1; }
  void set(size_t i, bool v) {
    const uint64_t m = uint64_t{1} << (i & 63);
    words_[i >> 6] = v ? (words_[i >> 6] | m) : (words_[i >> 6] & ~m);
  }
  void push_back(bool v);

  BitVec& operator^=(const BitVec& o);
  BitVec& operator&=(const BitVec& o);
  friend BitVec operator^(BitVec a, const BitVec& b) { return a ^= b; }
  friend BitVec operator&(BitVec a, const BitVec& b) { return a &= b; }
  BitVec operator~() const;
  bool operator==(const BitVec& o) const = default;

  // Bits [begin, begin + len).
  BitVec slice(size_t begin, size_t len) const;
  void append(const BitVec& o);
  static BitVec concat(std::span<const BitVec> parts);

  size_t popcount() const;

  // Takes ownership of packed words; bits past n are cleared.
  static BitVec from_words(std::vector<uint64_t> words, size_t n);

  std::vector<uint8_t> to_bytes() const;  // ceil(n/8) bytes
  static BitVec from_bytes(std::span<const uint8_t> bytes, size_t n);

  std::span<const uint64_t> words() const { return words_; }
  std::span<uint64_t> words() { return words_; }

 private:
  void clear_tail();

  std::vector<uint64_t> words_;
  size_t n_ = 0;
};

}  // namespace secmoe
