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
#include <stdexcept>
#include <string>
#include <string_view>

#include "fmt/format.h"

namespace secmoe {

enum class ErrorCode {
  kOverflow,
  kRandomnessExhausted,
  kDimensionMismatch,
  kLevelExceeded,
  kEngineUnsupported,
  kUnsupportedK,
  kInvalidConfig,
  kProtocol,
  kConnectionRefused,
  kTimeout,
  kChannelClosed,
  kMalformedFile,
  kIo,
  kParameter,
  kScaleMismatch,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

#define SECMOE_THROW(code, ...) \
  throw ::secmoe::Error((code), ::fmt::format(__VA_ARGS__))

#define SECMOE_ENFORCE(cond, code, ...) \
  do {                                  \
    if (!(cond)) {                      \
      SECMOE_THROW((code), __VA_ARGS__); \
    }                                   \
  } while (false)

// The two parties. The client holds the private input and the HE secret key;
// the server holds the model weights.
enum class Role : uint8_t { kClient = 0, kServer = 1 };

inline constexpr Role peer_of(Role r) {
  return r == Role::kClient ? Role::kServer : Role::kClient;
}

inline std::string_view role_name(Role r) {
  return r == Role::kClient ? "client" : "server";
}

}  // namespace secmoe
