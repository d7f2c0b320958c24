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
#include <utility>
#include <vector>

#include "gtest/gtest.h"

#include "dp/demos.hpp"
#include "dp/verifier.hpp"

namespace dp {
namespace {

const std::vector<std::pair<int, int>> kBitPairs = {{0, 1}, {1, 0}};

TEST(ExactDpCheckTest, RandomizedResponseIsTight) {
  for (double eps : {0.1, 0.5, 1.0, 2.0}) {
    DpTestReport r = ExactDpCheck<int>(RrOutputDistribution(eps), kBitPairs, eps, "rr");
    EXPECT_EQ(r.verdict, Verdict::kPass);
    EXPECT_NEAR(r.max_log_ratio, eps, 1e-12);
    EXPECT_EQ(r.method, CheckMethod::kExact);
    EXPECT_EQ(r.pairs_tested, 2);
  }
}

TEST(ExactDpCheckTest, UnderclaimedEpsilonFails) {
  DpTestReport r = ExactDpCheck<int>(RrOutputDistribution(1.0), kBitPairs, 0.5, "rr");
  EXPECT_EQ(r.verdict, Verdict::kFail);
}

TEST(ExactDpCheckTest, ConstantMechanismHasZeroRatio) {
  std::function<std::vector<double>(const int&)> constant = [](const int&) {
    return std::vector<double>{0.25, 0.75};
  };
  DpTestReport r = ExactDpCheck<int>(constant, kBitPairs, 0.0, "constant");
  EXPECT_EQ(r.verdict, Verdict::kPass);
  EXPECT_EQ(r.max_log_ratio, 0.0);
}

TEST(ExactDpCheckTest, ZeroProbabilityOnOneSideIsUnbounded) {
  std::function<std::vector<double>(const int&)> leaky = [](const int& x) {
    return x == 0 ? std::vector<double>{1.0, 0.0} : std::vector<double>{0.5, 0.5};
  };
  DpTestReport r = ExactDpCheck<int>(leaky, kBitPairs, 10.0, "leaky");
  EXPECT_EQ(r.verdict, Verdict::kFail);
  EXPECT_TRUE(std::isinf(r.max_log_ratio));
}

TEST(ExactDpCheckTest, SymmetricUnderPairSwap) {
  const std::vector<std::pair<int, int>> forward = {{0, 1}};
  const std::vector<std::pair<int, int>> backward = {{1, 0}};
  DpTestReport a = ExactDpCheck<int>(RrOutputDistribution(0.7), forward, 0.7, "rr");
  DpTestReport b = ExactDpCheck<int>(RrOutputDistribution(0.7), backward, 0.7, "rr");
  EXPECT_EQ(a.max_log_ratio, b.max_log_ratio);
  EXPECT_EQ(a.verdict, b.verdict);
}

TEST(ExactDpCheckTest, ExponentialMechanismOnPricingGrid) {
  // All single-buyer replacements on a 0.01 grid over [0, 3.01].
  Dataset base = demos::PricingValuations();
  ScoreFunction sf = demos::PricingScoreFunction();
  std::vector<std::pair<Dataset, Dataset>> pairs;
  for (size_t buyer = 0; buyer < base.size(); ++buyer) {
    for (int grid = 0; grid <= 301; ++grid) {
      std::vector<Record> rows = base.rows();
      rows[buyer] = {Value{std::min(3.01, grid / 100.0)}};
      pairs.emplace_back(base, Dataset(base.schema(), std::move(rows)));
    }
  }
  const double eps = 1.0;
  std::function<std::vector<double>(const Dataset&)> dist =
      [&sf, eps](const Dataset& d) { return ExponentialProbabilities(sf, d, eps); };
  DpTestReport r = ExactDpCheck<Dataset>(dist, pairs, eps, "exponential");
  EXPECT_EQ(r.verdict, Verdict::kPass);
  EXPECT_LE(r.max_log_ratio, eps + 1e-9);
  EXPECT_EQ(r.pairs_tested, 906);
}

TEST(McDpCheckTest, LaplaceCountPasses) {
  McDpCheckOptions options;
  options.trials = 200'000;
  RngStream rng(21, 0);
  auto base = [](RngStream& r) { return 100.0 + SampleLaplace(2.0, r); };
  auto neighbor = [](RngStream& r) { return 101.0 + SampleLaplace(2.0, r); };
  DpTestReport r = McDpCheck(base, neighbor, 0.5, 0.0, options, rng, "laplace");
  EXPECT_EQ(r.verdict, Verdict::kPass);
  EXPECT_EQ(r.method, CheckMethod::kMonteCarlo);
  EXPECT_EQ(r.trials, 200'000);
}

TEST(McDpCheckTest, BrokenHalfScaleLaplaceFails) {
  // Noise at sens/(2 eps) doubles the true privacy loss to 2 eps.
  McDpCheckOptions options;
  options.trials = 1'000'000;
  RngStream rng(22, 0);
  auto base = [](RngStream& r) { return 100.0 + SampleLaplace(1.0, r); };
  auto neighbor = [](RngStream& r) { return 101.0 + SampleLaplace(1.0, r); };
  DpTestReport r = McDpCheck(base, neighbor, 0.5, 0.0, options, rng, "laplace broken");
  EXPECT_EQ(r.verdict, Verdict::kFail);
}

TEST(McDpCheckTest, IdenticalDistributionsTriviallyPass) {
  McDpCheckOptions options;
  options.trials = 50'000;
  RngStream rng(23, 0);
  auto side = [](RngStream& r) { return SampleGaussian(1.0, r); };
  DpTestReport r = McDpCheck(side, side, 0.3, 0.0, options, rng, "identical");
  EXPECT_EQ(r.verdict, Verdict::kPass);
}

TEST(McDpCheckTest, ParameterValidation) {
  McDpCheckOptions options;
  options.trials = 100;  // below the floor
  RngStream rng(24, 0);
  auto side = [](RngStream& r) { return SampleGaussian(1.0, r); };
  EXPECT_THROW(McDpCheck(side, side, 0.3, 0.0, options, rng, "x"), std::invalid_argument);
  options.trials = 20'000;
  options.bins = 1;
  EXPECT_THROW(McDpCheck(side, side, 0.3, 0.0, options, rng, "x"), std::invalid_argument);
  options.bins = 40;
  options.pilot = 10;
  EXPECT_THROW(McDpCheck(side, side, 0.3, 0.0, options, rng, "x"), std::invalid_argument);
}

TEST(ExactDpCheckTest, EmptyPairSourceRejected) {
  const std::vector<std::pair<int, int>> none;
  EXPECT_THROW(ExactDpCheck<int>(RrOutputDistribution(1.0), none, 1.0, "rr"),
               std::invalid_argument);
}

TEST(LaplaceDensityRatioCheckTest, MirrorsTheProofIdentity) {
  // Separation equal to the sensitivity attains the ratio exactly at eps.
  DpTestReport tight = LaplaceDensityRatioCheck(100.0, 101.0, 1.0, 0.5);
  EXPECT_EQ(tight.verdict, Verdict::kPass);
  EXPECT_NEAR(tight.max_log_ratio, 0.5, 1e-9);
  // Smaller separation stays strictly inside the bound.
  DpTestReport slack = LaplaceDensityRatioCheck(100.0, 100.25, 1.0, 0.5);
  EXPECT_EQ(slack.verdict, Verdict::kPass);
  EXPECT_NEAR(slack.max_log_ratio, 0.125, 1e-9);
  // Outputs farther apart than the declared sensitivity violate the premise.
  EXPECT_THROW(LaplaceDensityRatioCheck(100.0, 103.0, 1.0, 0.5), std::invalid_argument);
}

TEST(CheckLaplaceAccuracyTest, TightForOneDimension) {
  RngStream rng(31, 0);
  AccuracyReport r = CheckLaplaceAccuracy(1.0, 1.0, 0.05, 1, 100'000, rng);
  EXPECT_EQ(r.verdict, Verdict::kPass);
  EXPECT_NEAR(r.observed, 0.05, 0.003);
}

TEST(CheckLaplaceAccuracyTest, UnionBoundConservativeForTenDimensions) {
  RngStream rng(31, 1);
  AccuracyReport r = CheckLaplaceAccuracy(1.0, 1.0, 0.05, 10, 20'000, rng);
  EXPECT_EQ(r.verdict, Verdict::kPass);
  EXPECT_LE(r.observed, 0.05 + r.tolerance);
}

TEST(CheckLaplaceAccuracyTest, HalfBetaIsTightToo) {
  RngStream rng(31, 2);
  AccuracyReport r = CheckLaplaceAccuracy(1.0, 1.0, 0.5, 1, 100'000, rng);
  EXPECT_EQ(r.verdict, Verdict::kPass);
  EXPECT_NEAR(r.observed, 0.5, 0.006);
}

TEST(CheckExponentialUtilityTest, PricingGapIsVacuous) {
  RngStream rng(32, 0);
  Dataset d = demos::PricingValuations();
  ScoreFunction sf = demos::PricingScoreFunction();
  AccuracyReport r = CheckExponentialUtility(sf, d, 1.0, 0.05, 50'000, rng);
  EXPECT_EQ(r.verdict, Verdict::kPass);
  EXPECT_EQ(r.observed, 0.0);  // gap 24.65 dwarfs the 0..3.01 score range
  EXPECT_EQ(r.expected, 0.0);
}

TEST(CheckExponentialUtilityTest, SixtyFourOutcomeInstance) {
  ScoreFunction sf;
  for (int i = 0; i < 64; ++i) sf.outcomes.push_back("h" + std::to_string(i));
  sf.score = [](const Dataset&, size_t h) { return static_cast<double>(h); };
  sf.declared_sensitivity = 1.0;
  Schema schema({ColumnSpec{"x", ColumnKind::kReal, 0.0, 1.0, {}}});
  Dataset tiny(schema, {{Value{0.0}}});
  RngStream rng(32, 1);
  const double beta = 0.5;  // beta large enough that the gap bites the range
  AccuracyReport r = CheckExponentialUtility(sf, tiny, 0.2, beta, 100'000, rng);
  EXPECT_EQ(r.verdict, Verdict::kPass);
  EXPECT_LE(r.observed, beta);
  EXPECT_GT(r.expected, 0.0);  // the exact failure mass is positive here
  EXPECT_NEAR(r.observed, r.expected, 0.005);
}

TEST(CheckExponentialUtilityTest, SingleOutcomeNeverFails) {
  ScoreFunction sf;
  sf.outcomes = {"only"};
  sf.score = [](const Dataset&, size_t) { return 5.0; };
  sf.declared_sensitivity = 1.0;
  Dataset d = demos::PricingValuations();
  RngStream rng(32, 2);
  AccuracyReport r = CheckExponentialUtility(sf, d, 1.0, 0.05, 1'000, rng);
  EXPECT_EQ(r.observed, 0.0);
  EXPECT_EQ(r.verdict, Verdict::kPass);
}

TEST(CheckRrEstimatorTest, UnbiasedAtMuPointThree) {
  RngStream rng(33, 0);
  RrEstimatorReport r = CheckRrEstimator(0.3, 10'000, 1.0, 0.1, 1'000, rng);
  EXPECT_EQ(r.verdict, Verdict::kPass);
  EXPECT_LE(r.bias_sigmas, 3.0);
  EXPECT_LE(r.bound_failure_rate, 0.1);
}

TEST(CheckRrEstimatorTest, LargeEpsilonConcentrates) {
  RngStream rng(33, 1);
  RrEstimatorReport r = CheckRrEstimator(0.3, 10'000, 10.0, 0.1, 200, rng);
  EXPECT_EQ(r.verdict, Verdict::kPass);
  // Spread across repetitions: SD = SE * sqrt(reps) < 0.01 at eps = 10.
  EXPECT_LT(r.standard_error * std::sqrt(200.0), 0.01);
}

TEST(CheckRrEstimatorTest, SymmetricAroundZeroForAllZeroData) {
  RngStream rng(33, 2);
  RrEstimatorReport r = CheckRrEstimator(0.0, 10'000, 1.0, 0.1, 500, rng);
  EXPECT_EQ(r.verdict, Verdict::kPass);
  EXPECT_LE(std::fabs(r.mean_estimate), 3.0 * r.standard_error);
}

TEST(ReportJsonTest, FieldsMirrorTheReport) {
  DpTestReport r;
  r.mechanism = "rr";
  r.pairs_tested = 2;
  r.max_log_ratio = 0.5;
  r.epsilon_claimed = 0.5;
  r.method = CheckMethod::kExact;
  r.verdict = Verdict::kPass;
  nlohmann::ordered_json j = ToJson(r);
  EXPECT_EQ(j["mechanism"], "rr");
  EXPECT_EQ(j["method"], "exact");
  EXPECT_EQ(j["verdict"], "pass");
  EXPECT_EQ(j["pairs_tested"], 2);
}

}  // namespace
}  // namespace dp
