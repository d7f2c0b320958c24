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

#ifndef DP_EXPONENTIAL_HPP_
#define DP_EXPONENTIAL_HPP_

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dp/dataset.hpp"
#include "dp/mechanisms.hpp"
#include "dp/privacy.hpp"
#include "dp/random.hpp"

namespace dp {

// A finite outcome set with a data-dependent score. The sensitivity of the
// score is declared by the caller (computing it exactly for an arbitrary
// score function is infeasible in general) and can be audited on small
// instances with MaxScoreDifference below.
struct ScoreFunction {
  std::vector<std::string> outcomes;
  std::function<double(const Dataset&, size_t)> score;  // s(D, outcome index)
  double declared_sensitivity = 0.0;
};

inline std::vector<double> ExponentialScores(const ScoreFunction& sf, const Dataset& dataset) {
  std::vector<double> scores;
  scores.reserve(sf.outcomes.size());
  for (size_t i = 0; i < sf.outcomes.size(); ++i) scores.push_back(sf.score(dataset, i));
  return scores;
}

// Exact selection probabilities, proportional to exp(eps * s / (2 * ds)),
// normalized through the log-sum-exp shift. eps = 0 gives the uniform
// distribution regardless of scores.
inline std::vector<double> ExponentialProbabilities(const ScoreFunction& sf,
                                                    const Dataset& dataset, double epsilon) {
  if (sf.outcomes.empty()) throw std::invalid_argument("exponential: empty outcome set");
  if (!(sf.declared_sensitivity > 0.0)) {
    throw std::invalid_argument("exponential: declared sensitivity must be > 0");
  }
  if (epsilon < 0.0) throw std::invalid_argument("exponential: epsilon must be >= 0");
  std::vector<double> log_weights = ExponentialScores(sf, dataset);
  for (double& w : log_weights) w = epsilon * w / (2.0 * sf.declared_sensitivity);
  return LogWeightsToProbabilities(log_weights);
}

// Score gap g with Pr[score >= OPT - g] >= 1 - beta:
//   g = (2 * ds / eps) * ln(|H| / beta).
inline double ExponentialUtilityBound(double score_sensitivity, size_t num_outcomes,
                                      double epsilon, double beta) {
  if (num_outcomes < 1) throw std::invalid_argument("utility bound: empty outcome set");
  if (!(score_sensitivity > 0.0)) {
    throw std::invalid_argument("utility bound: sensitivity must be > 0");
  }
  if (!(epsilon > 0.0)) throw std::invalid_argument("utility bound: epsilon must be > 0");
  if (!(beta > 0.0 && beta < 1.0)) {
    throw std::invalid_argument("utility bound: beta must lie in (0, 1)");
  }
  return (2.0 * score_sensitivity / epsilon) *
         std::log(static_cast<double>(num_outcomes) / beta);
}

struct SelectionResult {
  size_t index = 0;
  MechanismRelease release;
};

// Selects an outcome with probability proportional to exp(eps * s / (2 * ds)).
// The release carries only the selected label and the utility bound, never the
// achieved score (the score is data-dependent and not part of the DP output).
inline SelectionResult ApplyExponentialMechanism(const ScoreFunction& sf,
                                                 const Dataset& dataset, double epsilon,
                                                 RngStream& rng,
                                                 double beta = kDefaultBeta) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("exponential: epsilon must be > 0");
  std::vector<double> log_weights = ExponentialScores(sf, dataset);
  if (log_weights.empty()) throw std::invalid_argument("exponential: empty outcome set");
  if (!(sf.declared_sensitivity > 0.0)) {
    throw std::invalid_argument("exponential: declared sensitivity must be > 0");
  }
  for (double& w : log_weights) w = epsilon * w / (2.0 * sf.declared_sensitivity);
  SelectionResult result;
  result.index = SampleFromLogWeights(log_weights, rng);
  result.release.selected = sf.outcomes[result.index];
  result.release.mechanism = "exponential";
  result.release.params = PrivacyParams(epsilon, 0.0);
  result.release.utility_bound = ErrorBound{
      ExponentialUtilityBound(sf.declared_sensitivity, sf.outcomes.size(), epsilon, beta),
      beta};
  result.release.seed = rng.seed();
  result.release.stream_id = rng.stream_id();
  return result;
}

// Brute-force audit of the declared score sensitivity over a family of
// adjacent dataset pairs: max over pairs and outcomes of |s(D,h) - s(D',h)|.
inline double MaxScoreDifference(const ScoreFunction& sf,
                                 std::span<const std::pair<Dataset, Dataset>> pairs) {
  double max_diff = 0.0;
  for (const auto& [base, neighbor] : pairs) {
    for (size_t h = 0; h < sf.outcomes.size(); ++h) {
      max_diff = std::max(max_diff,
                          std::fabs(sf.score(base, h) - sf.score(neighbor, h)));
    }
  }
  return max_diff;
}

}  // namespace dp

#endif  // DP_EXPONENTIAL_HPP_
