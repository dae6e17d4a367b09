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

#include <gtest/gtest.h>

#include "secmoe/selftest.h"

namespace secmoe {
namespace {

void expect_ok(const SuiteResult& r) {
  EXPECT_TRUE(r.ok()) << r.name << ": " << r.failed << "/" << r.checked
                      << " failed, first: " << r.first_failure;
}

TEST(Selftest, CompareExhaustiveSmallRings) {
  for (int ell : {2, 3, 5, 8}) expect_ok(suite_compare_exhaustive(ell));
}

TEST(Selftest, TruncExhaustiveSmallRings) {
  for (int ell : {2, 4, 7, 10}) expect_ok(suite_trunc_exhaustive(ell));
}

TEST(Selftest, RandomOps) { expect_ok(suite_random_ops(2000, 1)); }
TEST(Selftest, Gelu) { expect_ok(suite_gelu(1000, 2)); }
TEST(Selftest, DealerAudit) { expect_ok(suite_dealer_audit(10000, 3)); }
TEST(Selftest, CorruptedPoolDetected) { expect_ok(suite_corrupted_pool(4)); }
TEST(Selftest, HeMatmul) { expect_ok(suite_he_matmul(20, 5)); }
TEST(Selftest, HeEngines) { expect_ok(suite_he_engines(10, 6)); }

TEST(Selftest, QuickLevelPassesAndReportsEverySuite) {
  size_t seen = 0;
  auto results = run_selftest(SelftestLevel::kQuick,
                              [&](const SuiteResult&) { ++seen; });
  EXPECT_EQ(seen, results.size());
  double total = 0;
  for (const auto& r : results) {
    expect_ok(r);
    total += r.seconds;
  }
  EXPECT_LT(total, 60.0);
}

}  // namespace
}  // namespace secmoe
