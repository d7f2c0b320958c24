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

#ifndef DP_ACCOUNTANT_HPP_
#define DP_ACCOUNTANT_HPP_

#include <cmath>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dp/privacy.hpp"

namespace dp {

struct BudgetExceededError : std::runtime_error {
  BudgetExceededError(const std::string& msg, PrivacyParams remaining_budget)
      : std::runtime_error(msg), remaining(remaining_budget) {}
  PrivacyParams remaining;
};

// Epsilon is booked as micro-epsilon integers (1e-6 granularity) so that k
// identical registrations total exactly k * eps and budget comparisons never
// drift. Delta values routinely sit near 1e-10, far below any practical
// fixed-point grain, so delta totals are summed in double.
inline int64_t ToMicroEpsilon(double epsilon) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("epsilon must be finite and >= 0");
  }
  return static_cast<int64_t>(std::llround(epsilon * 1e6));
}

inline double FromMicroEpsilon(int64_t micro) { return static_cast<double>(micro) / 1e6; }

// Guarantee for datasets differing in exactly k entries: k * eps. k = 0 means
// identical datasets (zero loss).
inline double GroupPrivacyEpsilon(double epsilon, int64_t k) {
  if (k < 0) throw std::invalid_argument("group privacy: k must be >= 0");
  if (!(epsilon >= 0.0)) throw std::invalid_argument("group privacy: epsilon must be >= 0");
  return static_cast<double>(k) * epsilon;
}

struct LedgerEntry {
  std::string id;
  int64_t epsilon_micro = 0;
  double delta = 0.0;
  std::string mechanism;
  std::string timestamp;
  bool is_post_process = false;
  std::string transform;  // post-process entries only
};

namespace internal {

inline std::string NowUtcIso8601() {
  std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

}  // namespace internal

// Append-only record of releases with composed totals (simple composition:
// epsilons and deltas add; post-processing is free). Mutation must be
// serialized by the owner -- one writer at a time, which the single-process
// CLI and tests satisfy; reads of a quiescent ledger are safe to share.
class Ledger {
 public:
  Ledger() = default;

  void SetBudget(PrivacyParams cap) {
    int64_t cap_micro = ToMicroEpsilon(cap.epsilon);
    if (total_epsilon_micro_ > cap_micro || total_delta_ > cap.delta) {
      throw std::invalid_argument("budget cap below already-registered totals");
    }
    budget_ = cap;
  }
  const std::optional<PrivacyParams>& budget() const { return budget_; }

  // Appends a release entry and updates totals; rejects entries that would
  // exceed the budget, reporting what remains.
  const LedgerEntry& Register(const PrivacyParams& params, std::string mechanism,
                              std::string id = "") {
    int64_t eps_micro = ToMicroEpsilon(params.epsilon);
    if (budget_.has_value()) {
      int64_t budget_micro = ToMicroEpsilon(budget_->epsilon);
      double remaining_delta = budget_->delta - total_delta_;
      if (total_epsilon_micro_ + eps_micro > budget_micro ||
          total_delta_ + params.delta > budget_->delta + 1e-15) {
        PrivacyParams remaining(FromMicroEpsilon(budget_micro - total_epsilon_micro_),
                                std::max(0.0, remaining_delta));
        std::ostringstream msg;
        msg << "budget exceeded: requested (" << params.epsilon << ", " << params.delta
            << "), remaining (" << remaining.epsilon << ", " << remaining.delta << ")";
        throw BudgetExceededError(msg.str(), remaining);
      }
    }
    LedgerEntry entry;
    entry.id = id.empty() ? "r" + std::to_string(++release_counter_) : std::move(id);
    entry.epsilon_micro = eps_micro;
    entry.delta = params.delta;
    entry.mechanism = std::move(mechanism);
    entry.timestamp = internal::NowUtcIso8601();
    entries_.push_back(std::move(entry));
    total_epsilon_micro_ += eps_micro;
    total_delta_ += params.delta;
    return entries_.back();
  }

  // Records a data-independent transform of an existing release. Free: totals
  // are not touched at all.
  const LedgerEntry& RecordPostProcess(const std::string& release_id, std::string transform) {
    bool found = false;
    for (const LedgerEntry& e : entries_) {
      if (!e.is_post_process && e.id == release_id) {
        found = true;
        break;
      }
    }
    if (!found) {
      throw std::invalid_argument("post-process: unknown release id '" + release_id + "'");
    }
    LedgerEntry entry;
    entry.id = release_id;
    entry.mechanism = "post_process";
    entry.timestamp = internal::NowUtcIso8601();
    entry.is_post_process = true;
    entry.transform = std::move(transform);
    entries_.push_back(std::move(entry));
    return entries_.back();
  }

  int64_t total_epsilon_micro() const { return total_epsilon_micro_; }
  double TotalEpsilon() const { return FromMicroEpsilon(total_epsilon_micro_); }
  double TotalDelta() const { return total_delta_; }
  const std::vector<LedgerEntry>& entries() const { return entries_; }

  std::optional<PrivacyParams> RemainingBudget() const {
    if (!budget_.has_value()) return std::nullopt;
    int64_t remaining_micro = ToMicroEpsilon(budget_->epsilon) - total_epsilon_micro_;
    return PrivacyParams(FromMicroEpsilon(std::max<int64_t>(0, remaining_micro)),
                         std::max(0.0, budget_->delta - total_delta_));
  }

  // --- persistence: one JSON object per line, append-only ---

  static nlohmann::ordered_json EntryToJson(const LedgerEntry& e) {
    nlohmann::ordered_json j;
    j["type"] = e.is_post_process ? "post_process" : "release";
    j["id"] = e.id;
    if (!e.is_post_process) {
      j["epsilon_micro"] = e.epsilon_micro;
      j["epsilon"] = FromMicroEpsilon(e.epsilon_micro);
      j["delta"] = e.delta;
      j["mechanism"] = e.mechanism;
    } else {
      j["transform"] = e.transform;
    }
    j["timestamp"] = e.timestamp;
    return j;
  }

  static Ledger FromJsonLines(std::istream& in) {
    Ledger ledger;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const std::exception& e) {
        throw std::runtime_error("ledger line " + std::to_string(lineno) + ": " + e.what());
      }
      const std::string type = j.value("type", "");
      if (type == "budget") {
        ledger.budget_ = PrivacyParams(j.at("epsilon").get<double>(),
                                       j.at("delta").get<double>());
      } else if (type == "release") {
        LedgerEntry entry;
        entry.id = j.at("id").get<std::string>();
        entry.epsilon_micro = j.contains("epsilon_micro")
                                  ? j.at("epsilon_micro").get<int64_t>()
                                  : ToMicroEpsilon(j.at("epsilon").get<double>());
        entry.delta = j.value("delta", 0.0);
        entry.mechanism = j.value("mechanism", "");
        entry.timestamp = j.value("timestamp", "");
        ledger.total_epsilon_micro_ += entry.epsilon_micro;
        ledger.total_delta_ += entry.delta;
        ledger.entries_.push_back(std::move(entry));
        ++ledger.release_counter_;
      } else if (type == "post_process") {
        LedgerEntry entry;
        entry.id = j.at("id").get<std::string>();
        entry.is_post_process = true;
        entry.transform = j.value("transform", "");
        entry.timestamp = j.value("timestamp", "");
        ledger.entries_.push_back(std::move(entry));
      } else {
        throw std::runtime_error("ledger line " + std::to_string(lineno) +
                                 ": unknown record type '" + type + "'");
      }
    }
    return ledger;
  }

  static Ledger LoadFileOrEmpty(const std::string& path) {
    std::ifstream in(path);
    if (!in) return Ledger();
    return FromJsonLines(in);
  }

  static Ledger LoadFile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open ledger file: " + path);
    return FromJsonLines(in);
  }

 private:
  std::vector<LedgerEntry> entries_;
  std::optional<PrivacyParams> budget_;
  int64_t total_epsilon_micro_ = 0;
  double total_delta_ = 0.0;
  int64_t release_counter_ = 0;
};

// Appends one record to the ledger file, creating it if needed.
inline void AppendLedgerLine(const std::string& path, const nlohmann::ordered_json& record) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot open ledger file for append: " + path);
  out << record.dump() << "\n";
}

inline void AppendLedgerEntry(const std::string& path, const LedgerEntry& entry) {
  AppendLedgerLine(path, Ledger::EntryToJson(entry));
}

inline void AppendBudgetLine(const std::string& path, const PrivacyParams& budget) {
  nlohmann::ordered_json j;
  j["type"] = "budget";
  j["epsilon"] = budget.epsilon;
  j["delta"] = budget.delta;
  AppendLedgerLine(path, j);
}

}  // namespace dp

#endif  // DP_ACCOUNTANT_HPP_
