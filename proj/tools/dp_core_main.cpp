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
// dp-core: batch front door for private query release, privacy accounting,
// chapter demos, and the DP verifier. Output is JSON lines by default; byte
// identical for identical (inputs, flags, seed).

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dp/accountant.hpp"
#include "dp/dataset.hpp"
#include "dp/demos.hpp"
#include "dp/exponential.hpp"
#include "dp/mechanisms.hpp"
#include "dp/queries.hpp"
#include "dp/random.hpp"
#include "dp/randomized_response.hpp"
#include "dp/schema.hpp"
#include "dp/verifier.hpp"

namespace {

using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitVerifyFail = 1;
constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;
constexpr int kExitInconclusive = 4;

struct RunConfig {
  std::string dataset_path;
  std::string schema_path;
  std::string query_path;
  double epsilon = 0.0;
  double delta = 0.0;
  std::string mechanism = "laplace";
  std::optional<uint64_t> seed;
  std::string ledger_path;
  std::string output_format = "json";
};

std::string DefaultLedgerPath(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("DP_CORE_LEDGER"); env != nullptr && *env != '\0') {
    return env;
  }
  return "dp_ledger.jsonl";
}

uint64_t ResolveSeed(const std::optional<uint64_t>& seed) {
  return seed.has_value() ? *seed : dp::RngStream::FromEntropy().seed();
}

void PrintTableValue(const std::string& key, const ordered_json& v, std::ostream& out) {
  out << key << ": ";
  if (v.is_string()) out << v.get<std::string>();
  else out << v.dump();
  out << "\n";
}

void Emit(const ordered_json& j, const std::string& format) {
  if (format == "table") {
    for (auto it = j.begin(); it != j.end(); ++it) PrintTableValue(it.key(), it.value(), std::cout);
  } else {
    std::cout << j.dump() << "\n";
  }
}

std::string QuerySummary(const dp::Query& query) {
  std::string s = dp::ToString(query.kind);
  if (!query.column.empty()) s += " " + query.column;
  for (size_t i = 0; i < query.dims.size(); ++i) {
    s += (i == 0 ? " " : " x ") + query.dims[i].column;
  }
  if (!query.predicate.empty()) {
    s += " where";
    for (size_t i = 0; i < query.predicate.atoms.size(); ++i) {
      const dp::PredicateAtom& a = query.predicate.atoms[i];
      static const char* kOps[] = {"==", "!=", "<", "<=", ">", ">="};
      if (i > 0) s += " AND";
      s += " " + a.column + " " + kOps[static_cast<int>(a.op)] + " " + a.literal;
    }
  }
  return s;
}

struct LoadedInputs {
  dp::Schema schema;
  dp::Dataset dataset;
  dp::Query query;
  dp::IngestReport ingest;
};

LoadedInputs LoadInputs(const RunConfig& config) {
  dp::Schema schema = dp::Schema::LoadFile(config.schema_path);
  dp::IngestReport ingest;
  dp::Dataset dataset = dp::Dataset::LoadCsvFile(schema, config.dataset_path, &ingest);
  dp::Query query = dp::LoadQueryFile(config.query_path);
  dp::ValidateQuery(query, schema);
  return LoadedInputs{std::move(schema), std::move(dataset), std::move(query), ingest};
}

int CmdRelease(const RunConfig& config) {
  LoadedInputs in = LoadInputs(config);
  dp::MechanismChoice mechanism;
  if (config.mechanism == "laplace") mechanism = dp::MechanismChoice::kLaplace;
  else if (config.mechanism == "gaussian-classic") mechanism = dp::MechanismChoice::kGaussianClassic;
  else if (config.mechanism == "gaussian-analytic") mechanism = dp::MechanismChoice::kGaussianAnalytic;
  else if (config.mechanism == "exponential") {
    throw std::invalid_argument(
        "release answers numeric aggregate queries; the exponential mechanism is a "
        "selection primitive (see 'dp-core demo pricing')");
  } else {
    throw std::invalid_argument("unknown mechanism '" + config.mechanism + "'");
  }

  const std::string ledger_path = DefaultLedgerPath(config.ledger_path);
  dp::Ledger ledger = dp::Ledger::LoadFileOrEmpty(ledger_path);
  const uint64_t seed = ResolveSeed(config.seed);
  dp::RngStream rng(seed, 0);

  dp::PrivacyParams params(config.epsilon, config.delta);
  dp::MechanismRelease release =
      dp::Release(in.query, in.dataset, params, mechanism, ledger, rng);
  const std::string release_id = ledger.entries().back().id;
  dp::AppendLedgerEntry(ledger_path, ledger.entries().back());

  ordered_json out;
  out["query"] = QuerySummary(in.query);
  out["epsilon"] = config.epsilon;
  out["delta"] = config.delta;
  out["mechanism"] = release.mechanism;
  if (in.query.kind == dp::QueryKind::kHistogram) {
    std::vector<int64_t> counts = dp::PostprocessHistogram(release.value);
    ledger.RecordPostProcess(release_id, "clamp negative counts to zero and round to integers");
    dp::AppendLedgerEntry(ledger_path, ledger.entries().back());
    out["value"] = counts;
    out["cells"] = dp::HistogramCellLabels(in.query, in.schema);
    out["postprocessed"] = true;
  } else {
    out["value"] = release.value;
  }
  out["error_bound_95"] = release.error_bound.has_value() ? release.error_bound->alpha : 0.0;
  out["seed"] = seed;
  out["ingest"] = {{"rows", in.ingest.rows}, {"clamped_values", in.ingest.clamped_values}};
  out["ledger_totals"] = {{"epsilon", ledger.TotalEpsilon()}, {"delta", ledger.TotalDelta()}};
  Emit(out, config.output_format);
  return kExitOk;
}

int CmdEvaluate(const RunConfig& config, bool unsafe) {
  if (!unsafe) {
    std::cerr << "evaluate discloses the exact (non-private) answer; pass --unsafe to "
                 "acknowledge\n";
    return kExitConfig;
  }
  std::cerr << "*** WARNING: non-private exact evaluation; no privacy guarantee applies ***\n";
  LoadedInputs in = LoadInputs(config);
  ordered_json out;
  out["query"] = QuerySummary(in.query);
  out["value"] = dp::Evaluate(in.query, in.dataset);
  if (in.query.kind == dp::QueryKind::kHistogram) {
    out["cells"] = dp::HistogramCellLabels(in.query, in.schema);
  }
  out["private"] = false;
  Emit(out, config.output_format);
  return kExitOk;
}

int CmdBudget(const std::string& ledger_flag, std::optional<double> set_epsilon,
              std::optional<double> set_delta, const std::string& format) {
  const std::string path = DefaultLedgerPath(ledger_flag);
  dp::Ledger ledger;
  if (set_epsilon.has_value()) {
    ledger = dp::Ledger::LoadFileOrEmpty(path);
    if (ledger.budget().has_value()) throw std::invalid_argument("ledger already has a budget");
    dp::PrivacyParams cap(*set_epsilon, set_delta.value_or(0.0));
    ledger.SetBudget(cap);
    dp::AppendBudgetLine(path, cap);
  } else {
    ledger = dp::Ledger::LoadFile(path);  // missing file is an error when only reading
  }
  int64_t releases = 0, post_processes = 0;
  for (const dp::LedgerEntry& e : ledger.entries()) {
    (e.is_post_process ? post_processes : releases) += 1;
  }
  ordered_json out;
  out["releases"] = releases;
  out["post_processes"] = post_processes;
  out["total_epsilon"] = ledger.TotalEpsilon();
  out["total_delta"] = ledger.TotalDelta();
  if (ledger.budget().has_value()) {
    out["budget"] = {{"epsilon", ledger.budget()->epsilon}, {"delta", ledger.budget()->delta}};
    auto remaining = ledger.RemainingBudget();
    out["remaining"] = {{"epsilon", remaining->epsilon}, {"delta", remaining->delta}};
  }
  Emit(out, format);
  return kExitOk;
}

int CmdDemo(const std::string& name, double epsilon, int64_t trials,
            const std::optional<uint64_t>& seed_flag, const std::string& format) {
  const uint64_t seed = ResolveSeed(seed_flag);
  dp::RngStream rng(seed, 0);
  ordered_json out;
  if (name == "differencing") {
    out = dp::demos::Differencing();
  } else if (name == "pricing") {
    out = dp::demos::Pricing(epsilon, trials, rng);
  } else if (name == "warner") {
    out = dp::demos::Warner(0.4, trials, rng);
  } else if (name == "rr_tradeoff") {
    const std::vector<double> sweep = {0.1, 0.25, 0.5, 1.0, 2.0, 4.0};
    out = dp::demos::RrTradeoff(trials, 0.05, 0.05, sweep);
  } else {
    throw std::invalid_argument("unknown demo '" + name + "'");
  }
  out["seed"] = seed;
  Emit(out, format);
  return kExitOk;
}

struct VerifyState {
  bool any_fail = false;
  bool any_inconclusive = false;
  std::vector<ordered_json> reports;

  void Add(const dp::DpTestReport& r) {
    any_fail |= r.verdict == dp::Verdict::kFail;
    any_inconclusive |= r.verdict == dp::Verdict::kInconclusive;
    reports.push_back(dp::ToJson(r));
  }
  void Add(const dp::AccuracyReport& r) {
    any_fail |= r.verdict == dp::Verdict::kFail;
    any_inconclusive |= r.verdict == dp::Verdict::kInconclusive;
    reports.push_back(dp::ToJson(r));
  }
  void Add(const dp::RrEstimatorReport& r) {
    any_fail |= r.verdict == dp::Verdict::kFail;
    reports.push_back(dp::ToJson(r));
  }
};

void VerifyLaplace(VerifyState& state, int64_t trials, dp::RngStream& rng, bool broken_noise) {
  state.Add(dp::LaplaceDensityRatioCheck(/*f_base=*/100.0, /*f_neighbor=*/101.0,
                                         /*l1_sensitivity=*/1.0, /*epsilon=*/0.5));
  const double eps = 0.5;
  const double sens = 1.0;
  const double scale = broken_noise ? sens / (2.0 * eps) : sens / eps;
  dp::McDpCheckOptions options;
  options.trials = trials;
  auto base = [scale](dp::RngStream& r) { return 100.0 + dp::SampleLaplace(scale, r); };
  auto neighbor = [scale](dp::RngStream& r) { return 101.0 + dp::SampleLaplace(scale, r); };
  dp::RngStream mc_rng = rng.Split(11);
  state.Add(dp::McDpCheck(base, neighbor, eps, 0.0, options, mc_rng,
                          broken_noise ? "laplace count (broken half-scale fixture)"
                                       : "laplace count"));
  dp::RngStream acc_rng = rng.Split(12);
  state.Add(dp::CheckLaplaceAccuracy(sens, eps, /*beta=*/0.05, /*dim=*/1, /*trials=*/100000,
                                     acc_rng));
}

void VerifyGaussian(VerifyState& state, int64_t trials, dp::RngStream& rng) {
  // Calibration self-checks: delta residual at the solver tolerance, analytic
  // never above classic, monotone in eps.
  double max_residual = 0.0;
  double max_excess = -1e300;
  bool monotone = true;
  for (double eps : {0.1, 0.25, 0.5, 0.75, 1.0}) {
    double prev_sigma = 0.0;
    for (double delta : {1e-8, 1e-6, 1e-4}) {
      double sigma_a = dp::GaussianSigmaAnalytic(1.0, eps, delta);
      double sigma_c = dp::GaussianSigmaClassic(1.0, eps, delta);
      max_residual = std::max(
          max_residual, std::fabs(dp::AnalyticGaussianDelta(1.0, eps, sigma_a) - delta));
      max_excess = std::max(max_excess, sigma_a - sigma_c);
      if (prev_sigma != 0.0 && sigma_a >= prev_sigma) monotone = false;  // larger delta -> smaller sigma
      prev_sigma = sigma_a;
    }
  }
  dp::AccuracyReport calib;
  calib.check = "gaussian_analytic_calibration";
  calib.observed = max_residual;
  calib.expected = 0.0;
  calib.tolerance = 1e-10;
  calib.verdict = (max_residual <= 1e-10 && max_excess <= 0.0 && monotone)
                      ? dp::Verdict::kPass
                      : dp::Verdict::kFail;
  calib.note = "residual, analytic<=classic, monotonicity over the (eps, delta) grid";
  state.Add(calib);

  dp::McDpCheckOptions options;
  options.trials = trials;
  {
    const double eps = 0.8, delta = 1e-5;
    const double sigma = dp::GaussianSigmaClassic(1.0, eps, delta);
    auto base = [sigma](dp::RngStream& r) { return dp::SampleGaussian(sigma, r); };
    auto neighbor = [sigma](dp::RngStream& r) { return 1.0 + dp::SampleGaussian(sigma, r); };
    dp::RngStream mc_rng = rng.Split(21);
    state.Add(dp::McDpCheck(base, neighbor, eps, delta, options, mc_rng, "gaussian_classic"));
  }
  {
    const double eps = 1.5, delta = 1e-5;  // beyond the classic theorem's range
    const double sigma = dp::GaussianSigmaAnalytic(1.0, eps, delta);
    auto base = [sigma](dp::RngStream& r) { return dp::SampleGaussian(sigma, r); };
    auto neighbor = [sigma](dp::RngStream& r) { return 1.0 + dp::SampleGaussian(sigma, r); };
    dp::RngStream mc_rng = rng.Split(22);
    state.Add(dp::McDpCheck(base, neighbor, eps, delta, options, mc_rng, "gaussian_analytic"));
  }
}

void VerifyExponential(VerifyState& state, dp::RngStream& rng) {
  dp::ScoreFunction sf = dp::demos::PricingScoreFunction();
  dp::Dataset base = dp::demos::PricingValuations();
  std::vector<std::pair<dp::Dataset, dp::Dataset>> pairs;
  for (size_t buyer = 0; buyer < base.size(); ++buyer) {
    for (int grid = 0; grid <= 301; ++grid) {
      double v = std::min(3.01, static_cast<double>(grid) / 100.0);
      std::vector<dp::Record> rows = base.rows();
      rows[buyer] = {dp::Value{v}};
      pairs.emplace_back(base, dp::Dataset(base.schema(), std::move(rows)));
    }
  }
  const double eps = 1.0;
  std::function<std::vector<double>(const dp::Dataset&)> distribution =
      [&sf, eps](const dp::Dataset& d) { return dp::ExponentialProbabilities(sf, d, eps); };
  state.Add(dp::ExactDpCheck<dp::Dataset>(distribution, pairs, eps, "exponential (pricing)"));

  dp::RngStream util_rng = rng.Split(31);
  state.Add(dp::CheckExponentialUtility(sf, base, eps, /*beta=*/0.05, /*trials=*/100000,
                                        util_rng));

  // A larger synthetic instance: 64 outcomes scoring 0..63 on a one-record
  // dataset, sensitivity 1.
  dp::ScoreFunction wide;
  for (int i = 0; i < 64; ++i) wide.outcomes.push_back("h" + std::to_string(i));
  wide.score = [](const dp::Dataset&, size_t h) { return static_cast<double>(h); };
  wide.declared_sensitivity = 1.0;
  dp::Schema tiny_schema({dp::ColumnSpec{"x", dp::ColumnKind::kReal, 0.0, 1.0, {}}});
  dp::Dataset tiny(tiny_schema, {{dp::Value{0.0}}});
  dp::RngStream wide_rng = rng.Split(32);
  state.Add(dp::CheckExponentialUtility(wide, tiny, /*epsilon=*/0.2, /*beta=*/0.5,
                                        /*trials=*/100000, wide_rng));
}

void VerifyRr(VerifyState& state, dp::RngStream& rng) {
  const std::vector<std::pair<int, int>> pairs = {{0, 1}, {1, 0}};
  for (double eps : {0.1, 0.5, 1.0, 2.0}) {
    state.Add(dp::ExactDpCheck<int>(dp::RrOutputDistribution(eps), pairs, eps,
                                    "randomized_response eps=" + std::to_string(eps)));
  }
  dp::RngStream est_rng = rng.Split(41);
  state.Add(dp::CheckRrEstimator(/*mu=*/0.3, /*n=*/10000, /*epsilon=*/1.0, /*beta=*/0.1,
                                 /*repetitions=*/1000, est_rng));
}

int CmdVerify(const std::string& suite, int64_t trials, const std::optional<uint64_t>& seed_flag,
              bool broken_noise, const std::string& format) {
  if (trials < 10'000) throw std::invalid_argument("verify: --trials must be >= 1e4");
  const uint64_t seed = ResolveSeed(seed_flag);
  dp::RngStream rng(seed, 0);
  VerifyState state;
  if (suite == "laplace" || suite == "all") VerifyLaplace(state, trials, rng, broken_noise);
  if (suite == "gaussian" || suite == "all") VerifyGaussian(state, trials, rng);
  if (suite == "exponential" || suite == "all") VerifyExponential(state, rng);
  if (suite == "rr" || suite == "all") VerifyRr(state, rng);
  if (state.reports.empty()) throw std::invalid_argument("unknown verify suite '" + suite + "'");
  for (const ordered_json& r : state.reports) Emit(r, format);
  ordered_json summary;
  summary["suite"] = suite;
  summary["reports"] = state.reports.size();
  summary["seed"] = seed;
  summary["verdict"] =
      state.any_fail ? "fail" : state.any_inconclusive ? "inconclusive" : "pass";
  Emit(summary, format);
  return state.any_fail ? kExitVerifyFail
         : state.any_inconclusive ? kExitInconclusive
                                  : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dp-core: differentially private query release, accounting, and verification"};
  app.require_subcommand(1);

  RunConfig config;
  bool unsafe = false;
  std::optional<double> budget_epsilon;
  std::optional<double> budget_delta;
  std::string demo_name;
  std::string verify_suite;
  double demo_epsilon = 1.0;
  double trials_flag = 1e6;  // double so 1e6-style spellings parse
  bool broken_noise = false;

  auto add_io_flags = [&config](CLI::App* cmd) {
    cmd->add_option("--dataset", config.dataset_path, "CSV dataset path")->required();
    cmd->add_option("--schema", config.schema_path, "schema file path")->required();
    cmd->add_option("--query", config.query_path, "query file path")->required();
    cmd->add_option("--format", config.output_format, "output format: json|table")
        ->check(CLI::IsMember({"json", "table"}));
  };

  CLI::App* release = app.add_subcommand("release", "answer a query with a DP mechanism");
  add_io_flags(release);
  release->add_option("--epsilon", config.epsilon, "privacy loss epsilon")->required();
  release->add_option("--delta", config.delta, "failure probability delta (gaussian only)");
  release->add_option("--mechanism", config.mechanism,
                      "laplace|gaussian-classic|gaussian-analytic|exponential")
      ->check(CLI::IsMember({"laplace", "gaussian-classic", "gaussian-analytic", "exponential"}));
  release->add_option("--seed", config.seed, "RNG seed (default: OS entropy; echoed in output)");
  release->add_option("--ledger", config.ledger_path,
                      "ledger file (default: $DP_CORE_LEDGER or dp_ledger.jsonl)");

  CLI::App* evaluate = app.add_subcommand("evaluate", "exact non-private answer (escape hatch)");
  add_io_flags(evaluate);
  evaluate->add_flag("--unsafe", unsafe, "acknowledge that the output is not private");

  CLI::App* demo = app.add_subcommand("demo", "run a self-contained demonstration");
  demo->add_option("name", demo_name, "differencing|pricing|warner|rr_tradeoff")->required();
  demo->add_option("--epsilon", demo_epsilon, "privacy loss for the pricing demo");
  demo->add_option("--trials", trials_flag, "samples / respondents / n for the sweep");
  demo->add_option("--seed", config.seed, "RNG seed");
  demo->add_option("--format", config.output_format, "output format: json|table")
      ->check(CLI::IsMember({"json", "table"}));

  CLI::App* verify = app.add_subcommand("verify", "check DP inequalities and accuracy theorems");
  verify->add_option("suite", verify_suite, "laplace|gaussian|exponential|rr|all")->required();
  verify->add_option("--trials", trials_flag, "Monte Carlo trials per check (>= 1e4)");
  verify->add_option("--seed", config.seed, "RNG seed");
  verify->add_flag("--broken-noise", broken_noise,
                   "swap in the half-scale Laplace fixture (the check must fail)");
  verify->add_option("--format", config.output_format, "output format: json|table")
      ->check(CLI::IsMember({"json", "table"}));

  CLI::App* budget = app.add_subcommand("budget", "print composed ledger totals");
  budget->add_option("--ledger", config.ledger_path,
                     "ledger file (default: $DP_CORE_LEDGER or dp_ledger.jsonl)");
  budget->add_option("--epsilon", budget_epsilon, "set a budget cap (with --delta)");
  budget->add_option("--delta", budget_delta, "budget cap delta");
  budget->add_option("--format", config.output_format, "output format: json|table")
      ->check(CLI::IsMember({"json", "table"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (release->parsed()) return CmdRelease(config);
    if (evaluate->parsed()) return CmdEvaluate(config, unsafe);
    if (demo->parsed()) {
      return CmdDemo(demo_name, demo_epsilon, std::llround(trials_flag), config.seed,
                     config.output_format);
    }
    if (verify->parsed()) {
      return CmdVerify(verify_suite, std::llround(trials_flag), config.seed, broken_noise,
                       config.output_format);
    }
    if (budget->parsed()) {
      return CmdBudget(config.ledger_path, budget_epsilon, budget_delta, config.output_format);
    }
  } catch (const dp::BudgetExceededError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBudget;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
