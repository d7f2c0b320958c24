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

#ifndef DP_VERIFIER_HPP_
#define DP_VERIFIER_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/beta.hpp>
#include <json.hpp>

#include "dp/dataset.hpp"
#include "dp/exponential.hpp"
#include "dp/mechanisms.hpp"
#include "dp/random.hpp"
#include "dp/randomized_response.hpp"

namespace dp {

enum class Verdict { kPass, kFail, kInconclusive };
enum class CheckMethod { kExact, kMonteCarlo };

inline const char* ToString(Verdict v) {
  switch (v) {
    case Verdict::kPass: return "pass";
    case Verdict::kFail: return "fail";
    case Verdict::kInconclusive: return "inconclusive";
  }
  return "?";
}

inline const char* ToString(CheckMethod m) {
  return m == CheckMethod::kExact ? "exact" : "monte_carlo";
}

// Outcome of one DP-inequality check. Exact checks are two-valued; Monte
// Carlo checks may come back inconclusive when sampling noise cannot separate
// compliance from violation.
struct DpTestReport {
  std::string mechanism;
  int pairs_tested = 0;
  double max_log_ratio = 0.0;
  double epsilon_claimed = 0.0;
  double delta_claimed = 0.0;
  CheckMethod method = CheckMethod::kExact;
  Verdict verdict = Verdict::kPass;
  int64_t trials = 0;
  double confidence = 1.0;
  std::string note;
};

inline nlohmann::ordered_json ToJson(const DpTestReport& r) {
  nlohmann::ordered_json j;
  j["kind"] = "dp_check";
  j["mechanism"] = r.mechanism;
  j["pairs_tested"] = r.pairs_tested;
  j["max_log_ratio"] = std::isfinite(r.max_log_ratio) ? nlohmann::ordered_json(r.max_log_ratio)
                                                      : nlohmann::ordered_json("inf");
  j["epsilon_claimed"] = r.epsilon_claimed;
  j["delta_claimed"] = r.delta_claimed;
  j["method"] = ToString(r.method);
  j["verdict"] = ToString(r.verdict);
  j["trials"] = r.trials;
  j["confidence"] = r.confidence;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

// Outcome of an accuracy-theorem check (error bounds, utility bounds,
// estimator bias).
struct AccuracyReport {
  std::string check;
  int64_t trials = 0;
  double observed = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  Verdict verdict = Verdict::kPass;
  std::string note;
};

inline nlohmann::ordered_json ToJson(const AccuracyReport& r) {
  nlohmann::ordered_json j;
  j["kind"] = "accuracy_check";
  j["check"] = r.check;
  j["trials"] = r.trials;
  j["observed"] = r.observed;
  j["expected"] = r.expected;
  j["tolerance"] = r.tolerance;
  j["verdict"] = ToString(r.verdict);
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

// Exact DP check over a finite output space: max over adjacent pairs and
// outcomes of |log(p(h|D) / p(h|D'))|, which covers both directions of the
// inequality at once. Pass iff the max is <= eps + 1e-9. An outcome with
// positive probability on one side and zero on the other is an unbounded
// ratio: fail (pure DP has no failure mass to absorb it).
template <typename Db>
DpTestReport ExactDpCheck(const std::function<std::vector<double>(const Db&)>& distribution,
                          std::span<const std::pair<Db, Db>> pairs, double epsilon,
                          const std::string& mechanism_name) {
  if (pairs.empty()) throw std::invalid_argument("exact dp check: no pairs");
  DpTestReport report;
  report.mechanism = mechanism_name;
  report.method = CheckMethod::kExact;
  report.epsilon_claimed = epsilon;
  report.pairs_tested = static_cast<int>(pairs.size());
  report.confidence = 1.0;
  double max_ratio = 0.0;
  for (const auto& [base, neighbor] : pairs) {
    std::vector<double> p = distribution(base);
    std::vector<double> q = distribution(neighbor);
    if (p.size() != q.size()) {
      throw std::invalid_argument("exact dp check: outcome spaces differ across the pair");
    }
    for (size_t i = 0; i < p.size(); ++i) {
      if (p[i] == 0.0 && q[i] == 0.0) continue;
      if (p[i] <= 0.0 || q[i] <= 0.0) {
        max_ratio = std::numeric_limits<double>::infinity();
        report.note = "outcome " + std::to_string(i) + " has zero probability on one side";
        break;
      }
      max_ratio = std::max(max_ratio, std::fabs(std::log(p[i] / q[i])));
    }
    if (std::isinf(max_ratio)) break;
  }
  report.max_log_ratio = max_ratio;
  report.verdict = max_ratio <= epsilon + 1e-9 ? Verdict::kPass : Verdict::kFail;
  return report;
}

namespace internal {

// Clopper-Pearson bounds for k successes in n trials at the given confidence.
struct BinomialInterval {
  double lower, upper;
  double width() const { return upper - lower; }
};

inline BinomialInterval ClopperPearson(int64_t k, int64_t n, double confidence) {
  const double alpha = 1.0 - confidence;
  BinomialInterval iv{0.0, 1.0};
  if (k > 0) {
    boost::math::beta_distribution<double> lo_dist(static_cast<double>(k),
                                                   static_cast<double>(n - k + 1));
    iv.lower = boost::math::quantile(lo_dist, alpha / 2.0);
  }
  if (k < n) {
    boost::math::beta_distribution<double> hi_dist(static_cast<double>(k + 1),
                                                   static_cast<double>(n - k));
    iv.upper = boost::math::quantile(hi_dist, 1.0 - alpha / 2.0);
  }
  return iv;
}

}  // namespace internal

struct McDpCheckOptions {
  int64_t trials = 1'000'000;
  int bins = 40;
  double confidence = 0.99;  // Clopper-Pearson level per bin
  int64_t pilot = 10'000;    // draws used to place equal-probability bin edges
};

// Monte Carlo DP check for continuous-output mechanisms. Any bin family is a
// valid event family under the DP inequality; equal-probability bins (edges at
// the quantiles of a pilot sample from the base side) balance power against
// multiplicity. Per bin and in both orientations:
//   fail        iff the CP lower bound on one side exceeds
//               e^eps * (CP upper bound on the other) + delta -- a certified
//               violation at the stated confidence;
//   pass        iff every point estimate satisfies p <= e^eps q + delta
//               within a tolerance of 2 * (sum of the two interval widths)
//               -- tight mechanisms sit exactly on the boundary in their tail
//               bins, so a positive-margin requirement would never pass;
//   inconclusive otherwise.
inline DpTestReport McDpCheck(const std::function<double(RngStream&)>& sample_base,
                              const std::function<double(RngStream&)>& sample_neighbor,
                              double epsilon, double delta, const McDpCheckOptions& options,
                              RngStream& rng, const std::string& mechanism_name) {
  if (options.trials < 10'000) {
    throw std::invalid_argument("mc dp check: trials must be >= 1e4");
  }
  if (options.bins < 2) throw std::invalid_argument("mc dp check: degenerate bins");
  if (options.pilot < options.bins) {
    throw std::invalid_argument("mc dp check: pilot sample smaller than bin count");
  }

  RngStream pilot_rng = rng.Split(1);
  RngStream base_rng = rng.Split(2);
  RngStream neighbor_rng = rng.Split(3);

  std::vector<double> pilot(static_cast<size_t>(options.pilot));
  for (double& v : pilot) v = sample_base(pilot_rng);
  std::sort(pilot.begin(), pilot.end());
  std::vector<double> edges;
  for (int b = 1; b < options.bins; ++b) {
    double e = pilot[static_cast<size_t>(static_cast<double>(pilot.size()) * b / options.bins)];
    if (edges.empty() || e > edges.back()) edges.push_back(e);
  }
  const size_t nbins = edges.size() + 1;

  auto bin_of = [&edges](double v) {
    return static_cast<size_t>(std::upper_bound(edges.begin(), edges.end(), v) - edges.begin());
  };
  std::vector<int64_t> count_base(nbins, 0), count_neighbor(nbins, 0);
  for (int64_t t = 0; t < options.trials; ++t) ++count_base[bin_of(sample_base(base_rng))];
  for (int64_t t = 0; t < options.trials; ++t) {
    ++count_neighbor[bin_of(sample_neighbor(neighbor_rng))];
  }

  DpTestReport report;
  report.mechanism = mechanism_name;
  report.method = CheckMethod::kMonteCarlo;
  report.epsilon_claimed = epsilon;
  report.delta_claimed = delta;
  report.pairs_tested = 1;
  report.trials = options.trials;
  report.confidence = options.confidence;

  const double n = static_cast<double>(options.trials);
  const double e_eps = std::exp(epsilon);
  double max_ratio = 0.0;
  bool certified_violation = false;
  bool within_slack = true;
  for (size_t b = 0; b < nbins; ++b) {
    internal::BinomialInterval iv_base =
        internal::ClopperPearson(count_base[b], options.trials, options.confidence);
    internal::BinomialInterval iv_neighbor =
        internal::ClopperPearson(count_neighbor[b], options.trials, options.confidence);
    double p = static_cast<double>(count_base[b]) / n;
    double q = static_cast<double>(count_neighbor[b]) / n;
    if (count_base[b] > 0 && count_neighbor[b] > 0) {
      max_ratio = std::max(max_ratio, std::fabs(std::log(p / q)));
    }
    if (iv_base.lower > e_eps * iv_neighbor.upper + delta ||
        iv_neighbor.lower > e_eps * iv_base.upper + delta) {
      certified_violation = true;
    }
    double slack = 2.0 * (iv_base.width() + iv_neighbor.width());
    if (p - (e_eps * q + delta) > slack || q - (e_eps * p + delta) > slack) {
      within_slack = false;
    }
  }
  report.max_log_ratio = max_ratio;
  report.verdict = certified_violation ? Verdict::kFail
                   : within_slack      ? Verdict::kPass
                                       : Verdict::kInconclusive;
  return report;
}

// Exact (no sampling) variant of the Laplace DP proof: on a grid of output
// points, the log-density difference between Laplace(f(D), sens/eps) and
// Laplace(f(D'), sens/eps) must stay within eps + 1e-12.
inline DpTestReport LaplaceDensityRatioCheck(double f_base, double f_neighbor,
                                             double l1_sensitivity, double epsilon,
                                             int grid_points = 1000) {
  if (grid_points < 2) throw std::invalid_argument("density ratio check: grid too small");
  if (std::fabs(f_base - f_neighbor) > l1_sensitivity + 1e-12) {
    throw std::invalid_argument("density ratio check: outputs farther apart than sensitivity");
  }
  const double scale = l1_sensitivity / epsilon;
  const double lo = std::min(f_base, f_neighbor) - 10.0 * scale;
  const double hi = std::max(f_base, f_neighbor) + 10.0 * scale;
  double max_ratio = 0.0;
  for (int i = 0; i < grid_points; ++i) {
    double r = lo + (hi - lo) * i / (grid_points - 1);
    max_ratio = std::max(max_ratio, std::fabs(LaplaceLogDensity(r, f_base, scale) -
                                              LaplaceLogDensity(r, f_neighbor, scale)));
  }
  DpTestReport report;
  report.mechanism = "laplace (density ratio)";
  report.method = CheckMethod::kExact;
  report.epsilon_claimed = epsilon;
  report.pairs_tested = 1;
  report.max_log_ratio = max_ratio;
  report.confidence = 1.0;
  report.verdict = max_ratio <= epsilon + 1e-12 ? Verdict::kPass : Verdict::kFail;
  return report;
}

// Empirically verifies the Laplace tail bound: the rate of trials where the
// max-coordinate error reaches alpha(beta) must not exceed beta by more than
// three binomial sigmas -- and must match beta within that tolerance for
// d = 1, where the bound is tight.
inline AccuracyReport CheckLaplaceAccuracy(double l1_sensitivity, double epsilon, double beta,
                                           int dim, int64_t trials, RngStream& rng) {
  if (trials < 1) throw std::invalid_argument("laplace accuracy: trials must be >= 1");
  const double alpha = LaplaceErrorBound(dim, l1_sensitivity, epsilon, beta);
  const double scale = l1_sensitivity / epsilon;
  int64_t exceed = 0;
  for (int64_t t = 0; t < trials; ++t) {
    double max_err = 0.0;
    for (int d = 0; d < dim; ++d) max_err = std::max(max_err, std::fabs(SampleLaplace(scale, rng)));
    if (max_err >= alpha) ++exceed;
  }
  AccuracyReport report;
  report.check = "laplace_accuracy(d=" + std::to_string(dim) + ",beta=" + std::to_string(beta) + ")";
  report.trials = trials;
  report.observed = static_cast<double>(exceed) / static_cast<double>(trials);
  report.expected = beta;
  report.tolerance = 3.0 * std::sqrt(beta * (1.0 - beta) / static_cast<double>(trials));
  bool ok = dim == 1 ? std::fabs(report.observed - beta) <= report.tolerance
                     : report.observed <= beta + report.tolerance;
  report.verdict = ok ? Verdict::kPass : Verdict::kFail;
  report.note = dim == 1 ? "tight one-dimensional tail" : "union bound, conservative";
  return report;
}

// Empirically verifies the exponential mechanism's utility theorem: the rate
// of selections scoring below OPT - gap(beta) must be at most beta. The exact
// failure probability from the selection distribution is reported alongside.
inline AccuracyReport CheckExponentialUtility(const ScoreFunction& sf, const Dataset& dataset,
                                              double epsilon, double beta, int64_t trials,
                                              RngStream& rng) {
  if (trials < 1) throw std::invalid_argument("exponential utility: trials must be >= 1");
  std::vector<double> scores = ExponentialScores(sf, dataset);
  std::vector<double> probs = ExponentialProbabilities(sf, dataset, epsilon);
  const double opt = *std::max_element(scores.begin(), scores.end());
  const double gap = ExponentialUtilityBound(sf.declared_sensitivity, sf.outcomes.size(),
                                             epsilon, beta);
  double exact_failure = 0.0;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] < opt - gap) exact_failure += probs[i];
  }
  int64_t failures = 0;
  for (int64_t t = 0; t < trials; ++t) {
    size_t pick = ApplyExponentialMechanism(sf, dataset, epsilon, rng, beta).index;
    if (scores[pick] < opt - gap) ++failures;
  }
  AccuracyReport report;
  report.check = "exponential_utility(|H|=" + std::to_string(sf.outcomes.size()) + ")";
  report.trials = trials;
  report.observed = static_cast<double>(failures) / static_cast<double>(trials);
  report.expected = exact_failure;
  report.tolerance = beta;
  report.verdict = report.observed <= beta ? Verdict::kPass : Verdict::kFail;
  report.note = "exact failure probability " + std::to_string(exact_failure);
  return report;
}

struct RrEstimatorReport {
  double mu = 0.0;
  int64_t n = 0;
  double epsilon = 0.0;
  int64_t repetitions = 0;
  double mean_estimate = 0.0;
  double standard_error = 0.0;
  double bias_sigmas = 0.0;       // |mean - mu| in standard errors
  double bound_alpha = 0.0;       // Chebyshev alpha at beta
  double bound_failure_rate = 0.0;
  double beta = 0.0;
  Verdict verdict = Verdict::kPass;
};

inline nlohmann::ordered_json ToJson(const RrEstimatorReport& r) {
  nlohmann::ordered_json j;
  j["kind"] = "rr_estimator_check";
  j["mu"] = r.mu;
  j["n"] = r.n;
  j["epsilon"] = r.epsilon;
  j["repetitions"] = r.repetitions;
  j["mean_estimate"] = r.mean_estimate;
  j["standard_error"] = r.standard_error;
  j["bias_sigmas"] = r.bias_sigmas;
  j["bound_alpha"] = r.bound_alpha;
  j["bound_failure_rate"] = r.bound_failure_rate;
  j["beta"] = r.beta;
  j["verdict"] = ToString(r.verdict);
  return j;
}

// Verifies unbiasedness and the Chebyshev bound of the randomized-response
// mean estimator on a population with true mean mu: across repetitions the
// mean estimate must sit within three standard errors of mu, and the rate of
// |estimate - mu| > alpha(beta) must be at most beta (Chebyshev is loose, so
// the observed rate is typically far below).
inline RrEstimatorReport CheckRrEstimator(double mu, int64_t n, double epsilon, double beta,
                                          int64_t repetitions, RngStream& rng) {
  if (n < 1 || repetitions < 2) {
    throw std::invalid_argument("rr estimator check: need n >= 1 and repetitions >= 2");
  }
  if (!(mu >= 0.0 && mu <= 1.0)) {
    throw std::invalid_argument("rr estimator check: mu must lie in [0, 1]");
  }
  const RrParams params = RrParams::FromEpsilon(epsilon);
  const int64_t ones = std::llround(mu * static_cast<double>(n));
  std::vector<int> bits(static_cast<size_t>(n), 0);
  for (int64_t i = 0; i < ones; ++i) bits[static_cast<size_t>(i)] = 1;
  const double true_mu = static_cast<double>(ones) / static_cast<double>(n);

  std::vector<int> responses(static_cast<size_t>(n));
  const double alpha = RrAccuracyBound(n, params, beta);
  double sum = 0.0, sum_sq = 0.0;
  int64_t bound_failures = 0;
  for (int64_t rep = 0; rep < repetitions; ++rep) {
    for (size_t i = 0; i < bits.size(); ++i) {
      responses[i] = RandomizedResponseBit(bits[i], params, rng);
    }
    double est = RrMeanEstimate(responses, params);
    sum += est;
    sum_sq += est * est;
    if (std::fabs(est - true_mu) > alpha) ++bound_failures;
  }
  const double reps = static_cast<double>(repetitions);
  const double mean = sum / reps;
  const double var = std::max(0.0, (sum_sq - reps * mean * mean) / (reps - 1.0));
  const double se = std::sqrt(var / reps);

  RrEstimatorReport report;
  report.mu = true_mu;
  report.n = n;
  report.epsilon = epsilon;
  report.repetitions = repetitions;
  report.mean_estimate = mean;
  report.standard_error = se;
  report.bias_sigmas = se > 0.0 ? std::fabs(mean - true_mu) / se : 0.0;
  report.bound_alpha = alpha;
  report.bound_failure_rate = static_cast<double>(bound_failures) / reps;
  report.beta = beta;
  report.verdict = (report.bias_sigmas <= 3.0 && report.bound_failure_rate <= beta)
                       ? Verdict::kPass
                       : Verdict::kFail;
  return report;
}

// Exact two-outcome distributions of epsilon-randomized response, as inputs
// to ExactDpCheck: the "dataset" is a single private bit.
inline std::function<std::vector<double>(const int&)> RrOutputDistribution(double epsilon) {
  return [epsilon](const int& x) {
    RrParams params = RrParams::FromEpsilon(epsilon);
    std::vector<double> probs(2);
    probs[static_cast<size_t>(x)] = params.keep_probability;
    probs[static_cast<size_t>(1 - x)] = params.flip_probability;
    return probs;
  };
}

}  // namespace dp

#endif  // DP_VERIFIER_HPP_
