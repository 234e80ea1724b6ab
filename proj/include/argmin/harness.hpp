#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "argmin/framework.hpp"
#include "argmin/problems.hpp"
#include "argmin/regularization.hpp"
#include "argmin/trace.hpp"

namespace argmin::harness {

enum class Algorithm { kAcnm, kArCubic, kArGeneral, kArPf, kGuessD, kUniformRestart, kUniformPf };

const char* to_string(Algorithm a);
/// Throws Error(kConfig) for an unknown name.
Algorithm parse_algorithm(const std::string& name);

struct ProblemConfig {
  GeneratorParams gen;
  /// Explicit starting point; otherwise x* + x0_offset * ones when x* is
  /// known and x0_offset * ones when it is not.
  std::optional<Vec> x0;
  double x0_offset = 1.0;
};

/// One experiment: a generated problem, an algorithm and a grid of targets.
struct ExperimentConfig {
  ProblemConfig problem;
  Algorithm algorithm = Algorithm::kArCubic;
  int p = 2;
  double nu = 1.0;
  std::vector<double> eps_grid{1e-3};
  std::uint64_t seed = 1;

  double cubic_tol = 1e-10;
  double C_A = 1.0;
  /// Schedule regime; ar_general defaults to Hoelder, uniform_restart to Lipschitz.
  std::optional<Regime> regime;
  /// Smoothness constant; defaults to the problem's L3 (p = 2) or L2 (p = 1).
  std::optional<double> L;
  /// Initial line-search value of the parameter-free methods.
  double L0 = 1.0;
  /// ar_pf: defaults to eps / (3 (9 D)^{p+nu-1}).
  std::optional<double> sigma1;
  /// uniform_pf: defaults to the problem's uniform-convexity constant.
  std::optional<double> sigma0;
  /// Uniform-convexity degree and constant; default to the problem's.
  std::optional<double> q;
  std::optional<double> sigma_q;
  int max_iters = 1000;
  int max_epochs = 200;
  int max_rounds = 60;
  bool check_relations = false;
  bool record_wall_time = false;
  std::string out_dir = "out";
};

/// Parses the JSON config schema documented in the README. Unknown keys,
/// wrong types and invalid values throw Error(kConfig).
ExperimentConfig config_from_json(const std::string& text);
/// Reads and parses a config file. Throws Error(kIo) if it cannot be read.
ExperimentConfig load_config(const std::string& path);
/// Canonical JSON (sorted keys, every field present).
std::string config_to_json(const ExperimentConfig& cfg);
/// Rejects inconsistent settings with Error(kConfig).
void validate(const ExperimentConfig& cfg);
/// 64-bit FNV-1a of the canonical JSON, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);
std::uint64_t fnv1a64(const std::string& bytes);

struct RunSummary {
  std::string config_hash;
  std::string algorithm;
  std::string problem;
  double eps = 0.0;
  int p = 2;
  double nu = 1.0;
  double final_grad_norm = 0.0;
  std::array<std::int64_t, 3> total_calls{0, 0, 0};
  /// "converged", "target_missed", or the name of the error that stopped the run.
  std::string termination;
  std::string message;
  bool aborted = false;
};

/// The trace ends with a row for the returned point (epoch 0, iter 0), whose
/// grad_norm is the base-oracle gradient norm reported in the summary.
struct RunRecord {
  RunSummary summary;
  RunTrace trace;
};

/// Runs one grid point. Algorithm failures are recorded in the summary;
/// configuration problems throw Error(kConfig).
RunRecord run_single(const ExperimentConfig& cfg, double eps);
/// Every grid point in turn, ordered by config hash.
std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg);
/// Grid points in parallel on up to `threads` workers, ordered by config hash.
std::vector<RunRecord> run_sweep(const ExperimentConfig& cfg, unsigned threads);

/// trace_<hash>.csv for each record plus summary.json listing all summaries.
void write_records(const std::vector<RunRecord>& records, const std::string& dir);
std::string summary_json(const std::vector<RunRecord>& records);
/// Reads summary.json from a directory written by write_records.
std::vector<RunSummary> read_summaries(const std::string& dir);

struct RateFit {
  double slope = 0.0;
  double r2 = 0.0;
  int points = 0;
};

/**
 * Least-squares slope of log(order-p calls) against log(1/eps). Needs at
 * least 4 records spanning at least 2 decades of eps, otherwise throws
 * Error(kInsufficientRange).
 */
RateFit estimate_rate(const std::vector<RunSummary>& records);

struct CheckResult {
  std::string module;
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double limit = 0.0;
  std::string detail;
};

struct VerifyOptions {
  /// Only modules whose name contains this string (empty runs all).
  std::string filter;
  std::uint64_t seed = 2024;
  /// Replaces prox_eval inside the regularization checks (fault injection).
  std::function<ProxEval(const PowerProxTerm&, const Vec&, int)> prox_eval;
};

/// Property checks for every module, each with its measured value and limit.
std::vector<CheckResult> verify_suite(const VerifyOptions& opt = {});
std::string format_report(const std::vector<CheckResult>& checks);

}  // namespace argmin::harness
