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
#include <functional>
#include <string>
#include <vector>

namespace secmoe {

// Outcome of one oracle-equivalence suite.
struct SuiteResult {
  std::string name;
  uint64_t checked = 0;
  uint64_t failed = 0;
  std::string first_failure;
  double seconds = 0;
  bool ok() const { return failed == 0 && checked > 0; }
};

// Signed comparison of every ell-bit value against every threshold.
SuiteResult suite_compare_exhaustive(int ell);
// Arithmetic shift of every ell-bit value by every shift in [1, ell).
SuiteResult suite_trunc_exhaustive(int ell);
// Products, MUX, B2A, AND and sign on n random full-ring 64-bit inputs.
SuiteResult suite_random_ops(size_t n, uint64_t seed);
// Secure GeLU against the plaintext fixed-point evaluation.
SuiteResult suite_gelu(size_t n, uint64_t seed);
// Dealer output audited by reconstruction.
SuiteResult suite_dealer_audit(size_t n, uint64_t seed);
// A corrupted pool must be caught by the audit.
SuiteResult suite_corrupted_pool(uint64_t seed);
// Encrypted matrix products (k, m, n <= 8, N = 4096) against schoolbook
// matrix and negacyclic products, on the semantic engine.
SuiteResult suite_he_matmul(size_t trials, uint64_t seed);
// The same compositions on the rlwe engine must decrypt to the semantic
// engine's result (16-bit plaintexts).
SuiteResult suite_he_engines(size_t trials, uint64_t seed);

enum class SelftestLevel { kQuick, kFull };
std::vector<SuiteResult> run_selftest(
    SelftestLevel level,
    const std::function<void(const SuiteResult&)>& on_result = {});

}  // namespace secmoe
