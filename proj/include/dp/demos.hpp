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

#ifndef DP_DEMOS_HPP_
#define DP_DEMOS_HPP_

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dp/dataset.hpp"
#include "dp/exponential.hpp"
#include "dp/randomized_response.hpp"
#include "dp/random.hpp"
#include "dp/schema.hpp"

namespace dp {
namespace demos {

// Differencing attack on exact averages: a company reports its exact average
// salary before (25 employees, 500000) and after (26 employees, 505000) one
// hire; the two deterministic answers pin the new hire's salary exactly.
inline nlohmann::ordered_json Differencing() {
  const int64_t n_before = 25;
  const int64_t avg_before = 500000;
  const int64_t n_after = 26;
  const int64_t avg_after = 505000;
  const int64_t inferred = n_after * avg_after - n_before * avg_before;
  nlohmann::ordered_json j;
  j["demo"] = "differencing";
  j["employees_before"] = n_before;
  j["average_salary_before"] = avg_before;
  j["employees_after"] = n_after;
  j["average_salary_after"] = avg_after;
  j["inferred_new_salary"] = inferred;
  j["lesson"] =
      "two exact deterministic releases compose into a full reconstruction of one "
      "individual's value; calibrated noise is what prevents this";
  return j;
}

// The pricing selection problem: three buyers with private valuations 1.00,
// 1.01 and 3.01; candidate prices equal the valuations; the revenue at price p
// is p times the number of buyers whose valuation reaches p.
inline Dataset PricingValuations() {
  Schema schema({ColumnSpec{"valuation", ColumnKind::kReal, 0.0, 3.01, {}}});
  std::vector<Record> rows = {{Value{1.00}}, {Value{1.01}}, {Value{3.01}}};
  return Dataset(std::move(schema), std::move(rows));
}

inline ScoreFunction PricingScoreFunction() {
  ScoreFunction sf;
  sf.outcomes = {"1.00", "1.01", "3.01"};
  static const std::vector<double> kPrices = {1.00, 1.01, 3.01};
  sf.score = [](const Dataset& d, size_t h) {
    const double price = kPrices[h];
    double buyers = 0;
    for (size_t r = 0; r < d.size(); ++r) {
      if (d.Numeric(r, 0) >= price) buyers += 1;
    }
    return price * buyers;
  };
  // One buyer's valuation moving anywhere in [0, 3.01] changes each revenue
  // by at most the price, hence by at most the top price.
  sf.declared_sensitivity = 3.01;
  return sf;
}

inline nlohmann::ordered_json Pricing(double epsilon, int64_t samples, RngStream& rng) {
  Dataset valuations = PricingValuations();
  ScoreFunction sf = PricingScoreFunction();
  std::vector<double> revenues = ExponentialScores(sf, valuations);
  std::vector<double> probs = ExponentialProbabilities(sf, valuations, epsilon);
  std::vector<int64_t> counts(sf.outcomes.size(), 0);
  for (int64_t t = 0; t < samples; ++t) {
    ++counts[ApplyExponentialMechanism(sf, valuations, epsilon, rng).index];
  }
  double gap = ExponentialUtilityBound(sf.declared_sensitivity, sf.outcomes.size(), epsilon,
                                       kDefaultBeta);
  nlohmann::ordered_json j;
  j["demo"] = "pricing";
  j["epsilon"] = epsilon;
  j["prices"] = sf.outcomes;
  j["revenues"] = revenues;
  j["probabilities"] = probs;
  j["samples"] = samples;
  nlohmann::ordered_json freq = nlohmann::ordered_json::array();
  for (int64_t c : counts) {
    freq.push_back(samples > 0 ? static_cast<double>(c) / static_cast<double>(samples) : 0.0);
  }
  j["selection_frequencies"] = freq;
  j["utility_gap_beta_0.05"] = gap;
  return j;
}

// Warner's survey protocol simulated end to end on a population with a given
// true fraction pi of the sensitive property; the analyst inverts
// E[Yes]/n = pi/2 + 1/4 to recover an estimate of pi.
inline nlohmann::ordered_json Warner(double pi, int64_t n, RngStream& rng) {
  if (!(pi >= 0.0 && pi <= 1.0)) throw std::invalid_argument("warner demo: pi must lie in [0,1]");
  if (n < 1) throw std::invalid_argument("warner demo: n must be >= 1");
  const int64_t haves = std::llround(pi * static_cast<double>(n));
  int64_t yes = 0;
  for (int64_t i = 0; i < n; ++i) {
    yes += WarnerRandomizedResponse(i < haves ? 1 : 0, rng);
  }
  const double yes_rate = static_cast<double>(yes) / static_cast<double>(n);
  nlohmann::ordered_json j;
  j["demo"] = "warner";
  j["true_fraction"] = static_cast<double>(haves) / static_cast<double>(n);
  j["respondents"] = n;
  j["yes_responses"] = yes;
  j["yes_rate"] = yes_rate;
  j["expected_yes_rate"] = pi / 2.0 + 0.25;
  j["estimated_fraction"] = 2.0 * yes_rate - 0.5;
  return j;
}

// Accuracy/privacy trade-off of randomized response: the Chebyshev error
// bound alpha(eps, n) at confidence 1 - beta, and the approximate sample size
// needed to reach a target accuracy at each eps.
inline nlohmann::ordered_json RrTradeoff(int64_t n, double beta, double target_alpha,
                                         std::span<const double> epsilons) {
  nlohmann::ordered_json j;
  j["demo"] = "rr_tradeoff";
  j["n"] = n;
  j["beta"] = beta;
  j["target_alpha"] = target_alpha;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (double eps : epsilons) {
    RrParams params = RrParams::FromEpsilon(eps);
    nlohmann::ordered_json row;
    row["epsilon"] = eps;
    row["alpha"] = RrAccuracyBound(n, params, beta);
    row["approx_n_for_target_alpha"] = RrSampleSizeForAccuracy(eps, target_alpha);
    rows.push_back(std::move(row));
  }
  j["sweep"] = rows;
  return j;
}

}  // namespace demos
}  // namespace dp

#endif  // DP_DEMOS_HPP_
