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

#ifndef DP_PRIVACY_HPP_
#define DP_PRIVACY_HPP_

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dp {

// The (epsilon, delta) privacy budget of a release. delta == 0 is pure DP.
struct PrivacyParams {
  double epsilon = 0.0;
  double delta = 0.0;

  PrivacyParams() = default;
  PrivacyParams(double eps, double dlt) : epsilon(eps), delta(dlt) {
    if (!(eps >= 0.0) || !std::isfinite(eps)) {
      throw std::invalid_argument("epsilon must be finite and >= 0");
    }
    if (!(dlt >= 0.0 && dlt <= 1.0)) {
      throw std::invalid_argument("delta must lie in [0, 1]");
    }
  }

  bool pure() const { return delta == 0.0; }
};

// Global sensitivity of a query in both norms, together with the output
// dimension the norm relation is checked against: l2 <= l1 <= sqrt(dim) * l2.
class Sensitivity {
 public:
  Sensitivity(double l1, double l2, int dim = 1) : l1_(l1), l2_(l2), dim_(dim) {
    if (dim < 1) throw std::invalid_argument("sensitivity: dim must be >= 1");
    if (!(l1 >= 0.0) || !(l2 >= 0.0)) {
      throw std::invalid_argument("sensitivity: norms must be nonnegative");
    }
    const double slack = 1e-12;
    if (l2 > l1 * (1.0 + slack)) {
      throw std::invalid_argument("sensitivity: l2 must not exceed l1");
    }
    if (l1 > std::sqrt(static_cast<double>(dim)) * l2 * (1.0 + slack) && l2 > 0.0) {
      throw std::invalid_argument("sensitivity: l1 must not exceed sqrt(dim) * l2");
    }
    if (l2 == 0.0 && l1 > 0.0) {
      throw std::invalid_argument("sensitivity: l1 > 0 requires l2 > 0");
    }
  }

  double l1() const { return l1_; }
  double l2() const { return l2_; }
  int dim() const { return dim_; }

 private:
  double l1_;
  double l2_;
  int dim_;
};

// alpha/beta pair: with probability >= 1 - beta the error (or, for selection
// releases, the score shortfall from optimal) is at most alpha.
struct ErrorBound {
  double alpha = 0.0;
  double beta = 0.0;
};

// A noisy answer plus its provenance. Numeric mechanisms carry `value` and an
// error_bound; selection mechanisms carry `selected` and a utility_bound.
struct MechanismRelease {
  std::vector<double> value;
  std::string selected;
  std::string mechanism;
  PrivacyParams params;
  std::optional<ErrorBound> error_bound;
  std::optional<ErrorBound> utility_bound;
  uint64_t seed = 0;
  uint64_t stream_id = 0;
};

}  // namespace dp

#endif  // DP_PRIVACY_HPP_
