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

#include <cmath>
#include <vector>

#include "gtest/gtest.h"

#include "dp/demos.hpp"
#include "dp/exponential.hpp"

namespace dp {
namespace {

TEST(PricingScoreTest, RevenueTableMatchesValuations) {
  // Valuations 1.00 / 1.01 / 3.01 give revenues 3.00, 2.02, 3.01 at the three
  // candidate prices; the optimum is to price at 3.01.
  Dataset valuations = demos::PricingValuations();
  ScoreFunction sf = demos::PricingScoreFunction();
  std::vector<double> revenues = ExponentialScores(sf, valuations);
  ASSERT_EQ(revenues.size(), 3u);
  EXPECT_EQ(revenues[0], 3.00);
  EXPECT_EQ(revenues[1], 2.02);
  EXPECT_EQ(revenues[2], 3.01);
}

TEST(ExponentialProbabilitiesTest, EqualScoresGiveUniform) {
  ScoreFunction sf;
  sf.outcomes = {"a", "b", "c", "d"};
  sf.score = [](const Dataset&, size_t) { return 2.5; };
  sf.declared_sensitivity = 1.0;
  Dataset d = demos::PricingValuations();
  std::vector<double> p = ExponentialProbabilities(sf, d, 1.0);
  for (double pi : p) EXPECT_NEAR(pi, 0.25, 1e-15);
}

TEST(ExponentialProbabilitiesTest, MatchesHandNormalizationOnPricing) {
  // Independent route: normalize exp(eps * u / (2 du)) directly, no
  // log-sum-exp shift.
  Dataset valuations = demos::PricingValuations();
  ScoreFunction sf = demos::PricingScoreFunction();
  const double eps = 1.0;
  const std::vector<double> revenues = {3.00, 2.02, 3.01};
  double weights[3];
  double total = 0.0;
  for (int i = 0; i < 3; ++i) {
    weights[i] = std::exp(eps * revenues[i] / (2.0 * 3.01));
    total += weights[i];
  }
  std::vector<double> p = ExponentialProbabilities(sf, valuations, eps);
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(p[i], weights[i] / total, 1e-13);
    sum += p[i];
  }
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(ExponentialProbabilitiesTest, EpsilonZeroIsUniformRegardlessOfScores) {
  Dataset valuations = demos::PricingValuations();
  ScoreFunction sf = demos::PricingScoreFunction();
  std::vector<double> p = ExponentialProbabilities(sf, valuations, 0.0);
  for (double pi : p) EXPECT_NEAR(pi, 1.0 / 3.0, 1e-15);
}

TEST(ExponentialProbabilitiesTest, InvariantUnderScoreShift) {
  Dataset valuations = demos::PricingValuations();
  ScoreFunction sf = demos::PricingScoreFunction();
  ScoreFunction shifted = sf;
  shifted.score = [base = sf.score](const Dataset& d, size_t h) { return base(d, h) + 77.7; };
  std::vector<double> p = ExponentialProbabilities(sf, valuations, 1.0);
  std::vector<double> q = ExponentialProbabilities(shifted, valuations, 1.0);
  for (size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(p[i], q[i], 1e-12);
}

TEST(ExponentialMechanismTest, SingleOutcomeAlwaysSelected) {
  ScoreFunction sf;
  sf.outcomes = {"only"};
  sf.score = [](const Dataset&, size_t) { return 1.0; };
  sf.declared_sensitivity = 1.0;
  Dataset d = demos::PricingValuations();
  RngStream rng(1, 0);
  for (int i = 0; i < 50; ++i) {
    SelectionResult r = ApplyExponentialMechanism(sf, d, 1.0, rng);
    EXPECT_EQ(r.index, 0u);
    EXPECT_EQ(r.release.selected, "only");
  }
}

TEST(ExponentialMechanismTest, FrequenciesMatchExactProbabilities) {
  Dataset valuations = demos::PricingValuations();
  ScoreFunction sf = demos::PricingScoreFunction();
  const double eps = 1.0;
  std::vector<double> exact = ExponentialProbabilities(sf, valuations, eps);
  RngStream rng(99, 0);
  const int64_t trials = 1'000'000;
  std::vector<int64_t> counts(3, 0);
  for (int64_t t = 0; t < trials; ++t) {
    ++counts[ApplyExponentialMechanism(sf, valuations, eps, rng).index];
  }
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(static_cast<double>(counts[i]) / trials, exact[i], 0.003);
  }
}

TEST(ExponentialMechanismTest, LargeEpsilonConcentratesOnArgmax) {
  // The revenue gap between 3.01 and 3.00 is only 0.01 against 2 * du = 6.02,
  // so driving the argmax probability past 0.999 takes eps in the thousands.
  Dataset valuations = demos::PricingValuations();
  ScoreFunction sf = demos::PricingScoreFunction();
  std::vector<double> exact = ExponentialProbabilities(sf, valuations, 5000.0);
  EXPECT_GT(exact[2], 0.999);
  RngStream rng(99, 1);
  int64_t hits = 0;
  const int64_t trials = 100'000;
  for (int64_t t = 0; t < trials; ++t) {
    hits += ApplyExponentialMechanism(sf, valuations, 5000.0, rng).index == 2 ? 1 : 0;
  }
  EXPECT_GT(static_cast<double>(hits) / trials, 0.999);
}

TEST(ExponentialMechanismTest, ReleaseReportsUtilityGapNotErrorBound) {
  Dataset valuations = demos::PricingValuations();
  ScoreFunction sf = demos::PricingScoreFunction();
  RngStream rng(5, 0);
  SelectionResult r = ApplyExponentialMechanism(sf, valuations, 1.0, rng);
  EXPECT_FALSE(r.release.error_bound.has_value());
  ASSERT_TRUE(r.release.utility_bound.has_value());
  EXPECT_TRUE(r.release.value.empty());
  EXPECT_EQ(r.release.params.delta, 0.0);
}

TEST(ExponentialUtilityBoundTest, FormulaAndScaling) {
  // |H| = 1: gap = (2 ds / eps) ln(1 / beta).
  EXPECT_NEAR(ExponentialUtilityBound(1.0, 1, 1.0, 0.05), 2.0 * std::log(20.0), 1e-12);
  // Doubling eps halves the gap.
  double g1 = ExponentialUtilityBound(1.0, 16, 0.5, 0.1);
  double g2 = ExponentialUtilityBound(1.0, 16, 1.0, 0.1);
  EXPECT_NEAR(g1, 2.0 * g2, 1e-12);
  // Pricing demo numbers: 2 * 3.01 * ln(3 / 0.05) = 24.65.
  EXPECT_NEAR(ExponentialUtilityBound(3.01, 3, 1.0, 0.05), 24.648, 1e-3);
  EXPECT_THROW(ExponentialUtilityBound(1.0, 0, 1.0, 0.05), std::invalid_argument);
  EXPECT_THROW(ExponentialUtilityBound(1.0, 3, 1.0, 1.0), std::invalid_argument);
}

TEST(ScoreSensitivityAuditTest, DeclaredSensitivityCoversAdjacentPairs) {
  // Brute-force audit on the pricing instance: replace each buyer's valuation
  // across a coarse grid and confirm the declared du = 3.01 dominates.
  Dataset base = demos::PricingValuations();
  ScoreFunction sf = demos::PricingScoreFunction();
  std::vector<std::pair<Dataset, Dataset>> pairs;
  for (size_t buyer = 0; buyer < base.size(); ++buyer) {
    for (double v = 0.0; v <= 3.01; v += 0.2505) {
      std::vector<Record> rows = base.rows();
      rows[buyer] = {Value{std::min(v, 3.01)}};
      pairs.emplace_back(base, Dataset(base.schema(), std::move(rows)));
    }
  }
  // Add/remove style pairs as well: drop one buyer.
  for (size_t buyer = 0; buyer < base.size(); ++buyer) {
    std::vector<Record> rows = base.rows();
    rows.erase(rows.begin() + static_cast<std::ptrdiff_t>(buyer));
    pairs.emplace_back(base, Dataset(base.schema(), std::move(rows)));
  }
  EXPECT_LE(MaxScoreDifference(sf, pairs), sf.declared_sensitivity);
}

TEST(ExponentialErrorsTest, EmptyOutcomesAndBadParams) {
  Dataset d = demos::PricingValuations();
  ScoreFunction empty;
  empty.score = [](const Dataset&, size_t) { return 0.0; };
  empty.declared_sensitivity = 1.0;
  EXPECT_THROW(ExponentialProbabilities(empty, d, 1.0), std::invalid_argument);
  ScoreFunction sf = demos::PricingScoreFunction();
  EXPECT_THROW(ExponentialProbabilities(sf, d, -1.0), std::invalid_argument);
  RngStream rng(1, 0);
  EXPECT_THROW(ApplyExponentialMechanism(sf, d, 0.0, rng), std::invalid_argument);
}

}  // namespace
}  // namespace dp
