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

#ifndef DP_MECHANISMS_HPP_
#define DP_MECHANISMS_HPP_

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dp/privacy.hpp"
#include "dp/random.hpp"

namespace dp {

struct CalibrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Default confidence choice for error bounds attached to releases.
inline constexpr double kDefaultBeta = 0.05;

// The alpha such that Pr[max-coordinate error >= alpha] <= beta for a
// d-dimensional Laplace release: alpha = ln(d / beta) * (sensitivity / eps).
// Tight for d = 1; a union bound above that.
inline double LaplaceErrorBound(int dim, double l1_sensitivity, double epsilon,
                                double beta) {
  if (dim < 1) throw std::invalid_argument("laplace bound: dim must be >= 1");
  if (!(epsilon > 0.0)) throw std::invalid_argument("laplace bound: epsilon must be > 0");
  if (l1_sensitivity < 0.0) throw std::invalid_argument("laplace bound: negative sensitivity");
  if (!(beta > 0.0 && beta < 1.0)) {
    throw std::invalid_argument("laplace bound: beta must lie in (0, 1)");
  }
  return std::log(static_cast<double>(dim) / beta) * (l1_sensitivity / epsilon);
}

// Log density of Laplace(mean, scale) at x.
inline double LaplaceLogDensity(double x, double mean, double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("laplace density: scale must be > 0");
  return -std::log(2.0 * scale) - std::fabs(x - mean) / scale;
}

// Adds independent Laplace(l1_sensitivity / epsilon) noise per coordinate.
// Zero sensitivity degenerates to the exact value (and a zero error bound).
inline MechanismRelease ApplyLaplaceMechanism(std::span<const double> value,
                                              double l1_sensitivity, double epsilon,
                                              RngStream& rng,
                                              double beta = kDefaultBeta) {
  if (value.empty()) throw std::invalid_argument("laplace mechanism: empty value");
  if (!(epsilon > 0.0)) throw std::invalid_argument("laplace mechanism: epsilon must be > 0");
  if (l1_sensitivity < 0.0) {
    throw std::invalid_argument("laplace mechanism: negative sensitivity");
  }
  const double scale = l1_sensitivity / epsilon;
  MechanismRelease release;
  release.value.reserve(value.size());
  for (double v : value) release.value.push_back(v + SampleLaplace(scale, rng));
  release.mechanism = "laplace";
  release.params = PrivacyParams(epsilon, 0.0);
  release.error_bound = ErrorBound{
      LaplaceErrorBound(static_cast<int>(value.size()), l1_sensitivity, epsilon, beta), beta};
  release.seed = rng.seed();
  release.stream_id = rng.stream_id();
  return release;
}

// Classic Gaussian calibration sigma = sqrt(2 ln(1.25/delta)) * l2 / eps,
// valid for eps in (0, 1]. Callers with eps > 1 must use the analytic
// calibration; delta = 0 is unsupported (Gaussian noise cannot give pure DP).
inline double GaussianSigmaClassic(double l2_sensitivity, double epsilon, double delta) {
  if (!(l2_sensitivity > 0.0)) {
    throw std::invalid_argument("gaussian classic: sensitivity must be > 0");
  }
  if (!(epsilon > 0.0)) throw std::invalid_argument("gaussian classic: epsilon must be > 0");
  if (epsilon > 1.0) {
    throw std::invalid_argument(
        "gaussian classic: epsilon > 1 is outside the theorem's range; use the "
        "analytic calibration");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("gaussian classic: delta must lie in (0, 1)");
  }
  return std::sqrt(2.0 * std::log(1.25 / delta)) * l2_sensitivity / epsilon;
}

// The exact delta achieved by Gaussian noise with the given sigma:
//   g(sigma) = Phi(l2/(2 sigma) - eps sigma/l2) - e^eps Phi(-l2/(2 sigma) - eps sigma/l2).
// Strictly decreasing in sigma, which justifies bisection below.
inline double AnalyticGaussianDelta(double l2_sensitivity, double epsilon, double sigma) {
  const double a = l2_sensitivity / (2.0 * sigma);
  const double b = epsilon * sigma / l2_sensitivity;
  const double first = StdNormalCdf(a - b);
  const double second = std::exp(epsilon) * StdNormalCdf(-a - b);
  if (std::isnan(second)) return 0.0;  // e^eps overflow against a vanishing tail
  return first - second;
}

// Minimal sigma satisfying the analytic Gaussian condition g(sigma) <= delta,
// valid for every eps > 0. Brackets by geometric expansion, then bisects until
// the delta residual |g(sigma) - delta| <= 1e-10 (at most 200 iterations).
inline double GaussianSigmaAnalytic(double l2_sensitivity, double epsilon, double delta) {
  if (!(l2_sensitivity > 0.0)) {
    throw std::invalid_argument("gaussian analytic: sensitivity must be > 0");
  }
  if (!(epsilon > 0.0)) throw std::invalid_argument("gaussian analytic: epsilon must be > 0");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("gaussian analytic: delta must lie in (0, 1)");
  }
  const double kResidual = 1e-10;
  double lo = l2_sensitivity;
  double hi = l2_sensitivity;
  int expansions = 0;
  while (AnalyticGaussianDelta(l2_sensitivity, epsilon, lo) <= delta) {
    lo /= 2.0;
    if (++expansions > 2000) {
      throw CalibrationError("gaussian analytic: cannot bracket from below (eps=" +
                             std::to_string(epsilon) + ", delta=" + std::to_string(delta) + ")");
    }
  }
  expansions = 0;
  while (AnalyticGaussianDelta(l2_sensitivity, epsilon, hi) > delta) {
    hi *= 2.0;
    if (++expansions > 2000) {
      throw CalibrationError("gaussian analytic: cannot bracket from above (eps=" +
                             std::to_string(epsilon) + ", delta=" + std::to_string(delta) + ")");
    }
  }
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    double g = AnalyticGaussianDelta(l2_sensitivity, epsilon, mid);
    if (std::fabs(g - delta) <= kResidual) return mid;
    if (g > delta) lo = mid;
    else hi = mid;
  }
  throw CalibrationError("gaussian analytic: bisection did not reach the 1e-10 residual");
}

// The alpha such that Pr[max-coordinate error >= alpha] <= beta for a
// d-dimensional Gaussian release (two-sided tail plus union bound).
inline double GaussianErrorBound(int dim, double sigma, double beta) {
  if (dim < 1) throw std::invalid_argument("gaussian bound: dim must be >= 1");
  if (sigma < 0.0) throw std::invalid_argument("gaussian bound: negative sigma");
  if (!(beta > 0.0 && beta < 1.0)) {
    throw std::invalid_argument("gaussian bound: beta must lie in (0, 1)");
  }
  if (sigma == 0.0) return 0.0;
  return sigma * StdNormalQuantile(1.0 - beta / (2.0 * static_cast<double>(dim)));
}

enum class GaussianCalibration { kClassic, kAnalytic };

// Adds independent N(0, sigma^2) noise per coordinate with sigma from the
// chosen calibrator. Zero sensitivity degenerates to the exact value.
inline MechanismRelease ApplyGaussianMechanism(std::span<const double> value,
                                               double l2_sensitivity, double epsilon,
                                               double delta, RngStream& rng,
                                               GaussianCalibration calibration,
                                               double beta = kDefaultBeta) {
  if (value.empty()) throw std::invalid_argument("gaussian mechanism: empty value");
  if (l2_sensitivity < 0.0) {
    throw std::invalid_argument("gaussian mechanism: negative sensitivity");
  }
  double sigma = 0.0;
  if (l2_sensitivity > 0.0) {
    sigma = calibration == GaussianCalibration::kClassic
                ? GaussianSigmaClassic(l2_sensitivity, epsilon, delta)
                : GaussianSigmaAnalytic(l2_sensitivity, epsilon, delta);
  } else if (!(epsilon > 0.0)) {
    throw std::invalid_argument("gaussian mechanism: epsilon must be > 0");
  }
  MechanismRelease release;
  release.value.reserve(value.size());
  for (double v : value) release.value.push_back(v + SampleGaussian(sigma, rng));
  release.mechanism = calibration == GaussianCalibration::kClassic ? "gaussian_classic"
                                                                   : "gaussian_analytic";
  release.params = PrivacyParams(epsilon, delta);
  release.error_bound =
      ErrorBound{GaussianErrorBound(static_cast<int>(value.size()), sigma, beta), beta};
  release.seed = rng.seed();
  release.stream_id = rng.stream_id();
  return release;
}

}  // namespace dp

#endif  // DP_MECHANISMS_HPP_
