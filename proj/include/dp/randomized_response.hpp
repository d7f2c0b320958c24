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

#ifndef DP_RANDOMIZED_RESPONSE_HPP_
#define DP_RANDOMIZED_RESPONSE_HPP_

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>

#include "dp/random.hpp"

namespace dp {

// Local-model parameters for epsilon-randomized response on a private bit:
// keep the bit with probability p = e^eps / (1 + e^eps), flip it otherwise.
// Both probabilities are computed directly (not via 1 - p) so each is
// correctly rounded; 2p - 1 is exposed as tanh(eps / 2) for the estimator.
struct RrParams {
  double epsilon = 0.0;
  double keep_probability = 0.5;   // p, in (1/2, 1) for eps > 0, exactly 1/2 at eps = 0
  double flip_probability = 0.5;   // 1 - p

  static RrParams FromEpsilon(double eps) {
    if (eps < 0.0 || std::isnan(eps)) {
      throw std::invalid_argument("randomized response: epsilon must be >= 0");
    }
    RrParams params;
    params.epsilon = eps;
    params.keep_probability = 1.0 / (1.0 + std::exp(-eps));
    params.flip_probability = 1.0 / (1.0 + std::exp(eps));
    return params;
  }

  // 2p - 1, the estimator's attenuation factor.
  double bias_factor() const { return std::tanh(epsilon / 2.0); }
};

// Reports the true bit with probability p, the flipped bit otherwise.
inline int RandomizedResponseBit(int x, const RrParams& params, RngStream& rng) {
  if (x != 0 && x != 1) throw std::invalid_argument("randomized response: bit must be 0 or 1");
  return SampleBernoulli(params.keep_probability, rng) == 1 ? x : 1 - x;
}

// Warner's two-coin survey protocol: a first fair flip decides between the
// truth (tails) and a second fair flip (heads -> answer 1, tails -> answer 0).
// Pr[answer = 1] = x/2 + 1/4, so the answer distribution coincides with
// RandomizedResponseBit at p = 3/4 (eps = ln 3) even though the coin
// procedure differs.
inline int WarnerRandomizedResponse(int x, RngStream& rng) {
  if (x != 0 && x != 1) throw std::invalid_argument("warner: bit must be 0 or 1");
  if (SampleBernoulli(0.5, rng) == 0) return x;           // tails: truth
  return SampleBernoulli(0.5, rng);                       // heads: second flip decides
}

// Unbiased mean estimate from randomized responses:
//   (1 / ((2p - 1) n)) * sum_i (M_i - (1 - p)).
// The per-sample (1 - p) correction makes E[estimate] equal the true mean of
// the private bits for every n.
inline double RrMeanEstimate(std::span<const int> responses, const RrParams& params) {
  if (responses.empty()) throw std::invalid_argument("rr estimator: empty responses");
  const double factor = params.bias_factor();
  if (factor == 0.0) {
    throw std::invalid_argument("rr estimator: undefined at eps = 0 (2p - 1 = 0)");
  }
  double sum = 0.0;
  for (int m : responses) {
    if (m != 0 && m != 1) throw std::invalid_argument("rr estimator: responses must be bits");
    sum += static_cast<double>(m) - params.flip_probability;
  }
  return sum / (factor * static_cast<double>(responses.size()));
}

// Chebyshev accuracy bound: with probability >= 1 - beta,
//   |estimate - mu| <= sqrt(1 / beta) / (2 (2p - 1) sqrt(n)).
inline double RrAccuracyBound(int64_t n, const RrParams& params, double beta) {
  if (n < 1) throw std::invalid_argument("rr bound: n must be >= 1");
  if (!(beta > 0.0 && beta < 1.0)) {
    throw std::invalid_argument("rr bound: beta must lie in (0, 1)");
  }
  const double factor = std::fabs(params.bias_factor());
  return std::sqrt(1.0 / beta) / (2.0 * factor * std::sqrt(static_cast<double>(n)));
}

// Small-eps sample-size rule of thumb: accuracy alpha needs about
// n ~ 1 / (eps^2 alpha^2) respondents.
inline double RrSampleSizeForAccuracy(double eps, double alpha) {
  if (!(eps > 0.0) || !(alpha > 0.0)) {
    throw std::invalid_argument("rr sample size: eps and alpha must be > 0");
  }
  return 1.0 / (eps * eps * alpha * alpha);
}

}  // namespace dp

#endif  // DP_RANDOMIZED_RESPONSE_HPP_
