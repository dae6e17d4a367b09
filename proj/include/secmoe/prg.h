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

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

namespace secmoe {

/// Seeded ChaCha20 keystream generator (libsodium). Two instances built from
/// the same (seed, stream) pair produce identical output.
class Prg {
 public:
  explicit Prg(uint64_t seed, uint64_t stream = 0);

  uint64_t next_u64();
  // Uniform over Z_{2^ell}.
  uint64_t next_ring(int ell);
  bool next_bit();
  // Uniform in [0, 1) with 53 bits of precision.
  double next_unit();
  void fill(std::span<uint8_t> out);

 private:
  void refill();

  std::array<uint8_t, 32> key_{};
  std::array<uint8_t, 12> nonce_{};
  uint32_t block_counter_ = 0;
  std::array<uint8_t, 4096> buf_{};
  size_t pos_ = sizeof(buf_);
  uint64_t bit_word_ = 0;
  int bits_left_ = 0;
};

}  // namespace secmoe
