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

#include "secmoe/prg.h"

#include <sodium.h>

#include <cstring>
#include <stdexcept>

namespace secmoe {
namespace {

void ensure_sodium() {
  static const bool ok = sodium_init() >= 0;
  if (!ok) {
    throw std::runtime_error("libsodium initialization failed");
  }
}

}  // namespace

Prg::Prg(uint64_t seed, uint64_t stream) {
  ensure_sodium();
  uint8_t material[16];
  std::memcpy(material, &seed, 8);
  std::memcpy(material + 8, &stream, 8);
  crypto_generichash(key_.data(), key_.size(), material, sizeof(material),
                     nullptr, 0);
}

void Prg::refill() {
  static const uint8_t kZeros[sizeof(buf_)] = {};
  crypto_stream_chacha20_ietf_xor_ic(buf_.data(), kZeros, buf_.size(),
                                     nonce_.data(), block_counter_,
                                     key_.data());
  block_counter_ += static_cast<uint32_t>(buf_.size() / 64);
  if (block_counter_ == 0) {
    // 256 GiB consumed on this nonce; move to the next one.
    for (auto& b : nonce_) {
      if (++b != 0) break;
    }
  }
  pos_ = 0;
}

void Prg::fill(std::span<uint8_t> out) {
  size_t done = 0;
  while (done < out.size()) {
    if (pos_ == buf_.size()) refill();
    size_t n = std::min(out.size() - done, buf_.size() - pos_);
    std::memcpy(out.data() + done, buf_.data() + pos_, n);
    pos_ += n;
    done += n;
  }
}

uint64_t Prg::next_u64() {
  if (buf_.size() - pos_ < 8) {
    if (pos_ != buf_.size()) pos_ = buf_.size();
    refill();
  }
  uint64_t v;
  std::memcpy(&v, buf_.data() + pos_, 8);
  pos_ += 8;
  return v;
}

uint64_t Prg::next_ring(int ell) {
  uint64_t v = next_u64();
  return ell >= 64 ? v : (v & ((uint64_t{1} << ell) - 1));
}

bool Prg::next_bit() {
  if (bits_left_ == 0) {
    bit_word_ = next_u64();
    bits_left_ = 64;
  }
  bool b = bit_word_ & 1;
  bit_word_ >>= 1;
  --bits_left_;
  return b;
}

double Prg::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

}  // namespace secmoe
