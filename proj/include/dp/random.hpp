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

#ifndef DP_RANDOM_HPP_
#define DP_RANDOM_HPP_

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace dp {

namespace internal {

// SplitMix64 finalizer; used to derive child stream ids.
inline uint64_t Mix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace internal

// A seeded random stream. Two streams built from the same (seed, stream_id)
// produce identical sample sequences on the same build; distinct stream_ids
// give statistically independent sequences. The engine is std::mt19937_64
// seeded through std::seed_seq, both of which are fully specified by the
// standard, so sequences are stable for a given standard library.
//
// A stream is a value owned by one task at a time; hand distinct stream_ids
// (or Split() children) to concurrent tasks.
class RngStream {
 public:
  explicit RngStream(uint64_t seed, uint64_t stream_id = 0)
      : seed_(seed), stream_id_(stream_id) {
    std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                      static_cast<uint32_t>(stream_id), static_cast<uint32_t>(stream_id >> 32)};
    engine_.seed(seq);
  }

  static RngStream FromEntropy() {
    std::random_device rd;
    uint64_t seed = (static_cast<uint64_t>(rd()) << 32) ^ rd();
    return RngStream(seed, 0);
  }

  // Derives a child stream with the same seed and a mixed stream id, for
  // fan-out across independent tasks or trials.
  RngStream Split(uint64_t child_id) const {
    return RngStream(seed_, internal::Mix64(stream_id_ ^ internal::Mix64(child_id)));
  }

  uint64_t seed() const { return seed_; }
  uint64_t stream_id() const { return stream_id_; }

  uint64_t NextUint64() { return engine_(); }

  // Uniform in [0, 1) with 53-bit resolution (the top 53 bits of the engine
  // output scaled by 2^-53).
  double NextUnit() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

 private:
  uint64_t seed_;
  uint64_t stream_id_;
  std::mt19937_64 engine_;
};

// Zero-mean Laplace sample with the given scale, via the inverse CDF: draw
// u uniform in (-1/2, 1/2) and return -scale * sign(u) * ln(1 - 2|u|). The
// uniform excludes the endpoint (u = -1/2 would hit ln 0); the grid has
// 2^-53 resolution, so the largest attainable |sample| is about 36.7 scales.
inline double SampleLaplace(double scale, RngStream& rng) {
  if (scale < 0.0 || !std::isfinite(scale)) {
    throw std::invalid_argument("laplace scale must be finite and >= 0");
  }
  if (scale == 0.0) return 0.0;
  double r;
  do {
    r = rng.NextUnit();
  } while (r == 0.0);
  double u = r - 0.5;  // (-1/2, 1/2)
  double sign = u < 0.0 ? -1.0 : 1.0;
  return -scale * sign * std::log1p(-2.0 * std::fabs(u));
}

// Zero-mean normal sample with standard deviation sigma. Box-Muller, cosine
// branch: exactly two uniforms per sample, no rejection, no cached state.
inline double SampleGaussian(double sigma, RngStream& rng) {
  if (sigma < 0.0 || !std::isfinite(sigma)) {
    throw std::invalid_argument("gaussian sigma must be finite and >= 0");
  }
  if (sigma == 0.0) return 0.0;
  double u1 = 1.0 - rng.NextUnit();  // (0, 1], keeps log finite
  double u2 = rng.NextUnit();
  double r = std::sqrt(-2.0 * std::log(u1));
  return sigma * r * std::cos(2.0 * std::numbers::pi * u2);
}

// Returns 1 with probability p.
inline int SampleBernoulli(double p, RngStream& rng) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("bernoulli p must lie in [0, 1]");
  }
  return rng.NextUnit() < p ? 1 : 0;
}

// Exact normalized probabilities exp(w_i - logsumexp(w)). Entries may be
// -infinity (excluded outcomes); at least one entry must be finite.
inline std::vector<double> LogWeightsToProbabilities(std::span<const double> log_weights) {
  if (log_weights.empty()) throw std::invalid_argument("log weights: empty vector");
  double max_w = -std::numeric_limits<double>::infinity();
  for (double w : log_weights) {
    if (std::isnan(w) || w == std::numeric_limits<double>::infinity()) {
      throw std::invalid_argument("log weights must be finite or -infinity");
    }
    max_w = std::max(max_w, w);
  }
  if (max_w == -std::numeric_limits<double>::infinity()) {
    throw std::invalid_argument("log weights: no valid outcome (all -infinity)");
  }
  std::vector<double> probs(log_weights.size());
  double total = 0.0;
  for (size_t i = 0; i < log_weights.size(); ++i) {
    probs[i] = std::exp(log_weights[i] - max_w);
    total += probs[i];
  }
  for (double& p : probs) p /= total;
  return probs;
}

// Samples index i with probability proportional to exp(log_weights[i]).
inline size_t SampleFromLogWeights(std::span<const double> log_weights, RngStream& rng) {
  std::vector<double> probs = LogWeightsToProbabilities(log_weights);
  double u = rng.NextUnit();
  double cum = 0.0;
  size_t last_positive = 0;
  for (size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] > 0.0) last_positive = i;
    cum += probs[i];
    if (u < cum && probs[i] > 0.0) return i;
  }
  return last_positive;  // u landed in the rounding gap at the top
}

// Standard normal CDF via the complementary error function; absolute error
// well under 1e-12 everywhere, which the analytic Gaussian calibration needs
// to resolve deltas near 1e-10.
inline double StdNormalCdf(double t) {
  return 0.5 * std::erfc(-t / std::sqrt(2.0));
}

// Inverse of StdNormalCdf by bisection. Plumbing for Gaussian tail bounds.
inline double StdNormalQuantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("normal quantile requires p in (0, 1)");
  }
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200 && hi - lo > 1e-13; ++i) {
    double mid = 0.5 * (lo + hi);
    if (StdNormalCdf(mid) < p) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace dp

#endif  // DP_RANDOM_HPP_
