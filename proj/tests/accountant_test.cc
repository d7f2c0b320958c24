//
// Copyright 2026 The dpcore Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include <cstdio>
#include <cstring>
#include <sstream>

#include "gtest/gtest.h"

#include "dp/accountant.hpp"

namespace dp {
namespace {

TEST(MicroEpsilonTest, RoundTripAndValidation) {
  EXPECT_EQ(ToMicroEpsilon(0.5), 500000);
  EXPECT_EQ(ToMicroEpsilon(0.0), 0);
  EXPECT_EQ(FromMicroEpsilon(ToMicroEpsilon(1.25)), 1.25);
  EXPECT_THROW(ToMicroEpsilon(-1.0), std::invalid_argument);
}

TEST(LedgerTest, SequentialCompositionAddsEpsilons) {
  Ledger ledger;
  ledger.Register(PrivacyParams(0.3, 0.0), "laplace");
  ledger.Register(PrivacyParams(0.2, 0.0), "laplace");
  EXPECT_EQ(ledger.TotalEpsilon(), 0.5);
  EXPECT_EQ(ledger.TotalDelta(), 0.0);
}

TEST(LedgerTest, KIdenticalRegistrationsTotalExactlyKEpsilon) {
  // 0.1 is not a dyadic double, which is exactly why the fixed-point
  // bookkeeping exists: 7 registrations of 0.1 must give 0.7 exactly.
  Ledger ledger;
  for (int i = 0; i < 7; ++i) ledger.Register(PrivacyParams(0.1, 0.0), "laplace");
  EXPECT_EQ(ledger.total_epsilon_micro(), 700000);
  EXPECT_EQ(ledger.TotalEpsilon(), 0.7);
}

TEST(LedgerTest, EmptyLedgerHasZeroTotals) {
  Ledger ledger;
  EXPECT_EQ(ledger.TotalEpsilon(), 0.0);
  EXPECT_EQ(ledger.TotalDelta(), 0.0);
  EXPECT_TRUE(ledger.entries().empty());
}

TEST(LedgerTest, OrderIndependentTotals) {
  Ledger a, b;
  a.Register(PrivacyParams(0.25, 1e-6), "m1");
  a.Register(PrivacyParams(0.5, 1e-7), "m2");
  b.Register(PrivacyParams(0.5, 1e-7), "m2");
  b.Register(PrivacyParams(0.25, 1e-6), "m1");
  EXPECT_EQ(a.total_epsilon_micro(), b.total_epsilon_micro());
  EXPECT_EQ(a.TotalDelta(), b.TotalDelta());
}

TEST(LedgerTest, BudgetRejectionReportsRemaining) {
  Ledger ledger;
  ledger.SetBudget(PrivacyParams(1.0, 0.0));
  ledger.Register(PrivacyParams(0.75, 0.0), "laplace");
  try {
    ledger.Register(PrivacyParams(0.5, 0.0), "laplace");
    FAIL() << "expected BudgetExceededError";
  } catch (const BudgetExceededError& e) {
    EXPECT_EQ(e.remaining.epsilon, 0.25);
  }
  // The failed registration must not have consumed anything.
  EXPECT_EQ(ledger.TotalEpsilon(), 0.75);
  EXPECT_EQ(ledger.entries().size(), 1u);
  ledger.Register(PrivacyParams(0.25, 0.0), "laplace");  // exact fit passes
  EXPECT_EQ(ledger.TotalEpsilon(), 1.0);
}

TEST(LedgerTest, BudgetCapBelowExistingTotalsRejected) {
  Ledger ledger;
  ledger.Register(PrivacyParams(0.6, 0.0), "laplace");
  EXPECT_THROW(ledger.SetBudget(PrivacyParams(0.5, 0.0)), std::invalid_argument);
}

TEST(LedgerTest, PostProcessLeavesTotalsBitIdentical) {
  Ledger ledger;
  ledger.Register(PrivacyParams(0.5, 1e-7), "laplace histogram", "r1");
  int64_t eps_before = ledger.total_epsilon_micro();
  double delta_before = ledger.TotalDelta();
  for (int i = 0; i < 5; ++i) {
    ledger.RecordPostProcess("r1", "clamp+round pass " + std::to_string(i));
  }
  EXPECT_EQ(ledger.total_epsilon_micro(), eps_before);
  double delta_after = ledger.TotalDelta();
  EXPECT_EQ(std::memcmp(&delta_before, &delta_after, sizeof(double)), 0);
  EXPECT_EQ(ledger.entries().size(), 6u);
}

TEST(LedgerTest, PostProcessUnknownIdRejected) {
  Ledger ledger;
  ledger.Register(PrivacyParams(0.5, 0.0), "laplace", "r1");
  EXPECT_THROW(ledger.RecordPostProcess("nope", "clamp"), std::invalid_argument);
}

TEST(LedgerTest, FileRoundTripPreservesMicroEpsilon) {
  Ledger ledger;
  ledger.SetBudget(PrivacyParams(2.0, 1e-5));
  ledger.Register(PrivacyParams(0.1, 1e-7), "laplace mean", "r1");
  ledger.Register(PrivacyParams(0.1, 0.0), "laplace count", "r2");
  ledger.RecordPostProcess("r2", "round");

  const std::string path = testing::TempDir() + "ledger_roundtrip.jsonl";
  std::remove(path.c_str());
  AppendBudgetLine(path, *ledger.budget());
  for (const LedgerEntry& e : ledger.entries()) AppendLedgerEntry(path, e);

  Ledger loaded = Ledger::LoadFile(path);
  EXPECT_EQ(loaded.total_epsilon_micro(), ledger.total_epsilon_micro());
  EXPECT_EQ(loaded.TotalDelta(), ledger.TotalDelta());
  EXPECT_EQ(loaded.entries().size(), ledger.entries().size());
  ASSERT_TRUE(loaded.budget().has_value());
  EXPECT_EQ(loaded.budget()->epsilon, 2.0);
  std::remove(path.c_str());

  EXPECT_THROW(Ledger::LoadFile(testing::TempDir() + "does_not_exist.jsonl"),
               std::runtime_error);
  EXPECT_EQ(Ledger::LoadFileOrEmpty(testing::TempDir() + "does_not_exist.jsonl")
                .entries()
                .size(),
            0u);
}

TEST(GroupPrivacyTest, ScalesLinearlyInGroupSize) {
  EXPECT_EQ(GroupPrivacyEpsilon(0.5, 1), 0.5);
  EXPECT_EQ(GroupPrivacyEpsilon(0.5, 4), 2.0);
  EXPECT_EQ(GroupPrivacyEpsilon(0.7, 0), 0.0);  // identical datasets
  EXPECT_THROW(GroupPrivacyEpsilon(0.5, -1), std::invalid_argument);
}

}  // namespace
}  // namespace dp
