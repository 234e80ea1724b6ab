#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "argmin/error.hpp"
#include "argmin/oracle.hpp"
#include "argmin/trace.hpp"

namespace argmin {

/**
 * Estimating function of accelerated cubic Newton,
 *   f_k(x) = const_k + <c_k, x - x0> + (C/6) ||x - x0||^3,
 * stored through its accumulators so the minimizer has a closed form.
 */
class EstimatingState {
 public:
  EstimatingState(Vec x0, double C);

  /// f_1 = f(x1) + ||grad f(x1)||^{3/2} / sqrt(L + M) + (C/6)||x - x0||^3 with A_1 = 1.
  void init(double f1, double grad1_norm, double L_plus_M);
  /// f_{k+1} = f_k + a (f(x) + <g, . - x>), A_{k+1} = A_k + a, and the
  /// gradient term A_{k+1} ||g||^{3/2} / sqrt(L + M) joins the running sum.
  void add(double a, double f, const Vec& g, const Vec& x, double L_plus_M);
  /// Only ever increased by the adaptive variant.
  void set_C(double C);

  double A() const { return A_; }
  const Vec& c() const { return c_; }
  double constant() const { return const_; }
  double C() const { return C_; }
  const Vec& x0() const { return x0_; }
  double grad_norm_terms() const { return grad_terms_; }

  double value(const Vec& x) const;
  /// min_x f_k(x) = const - (2/3) sqrt(2/C) ||c||^{3/2}
  double min_value() const;

 private:
  Vec x0_;
  double C_;
  double A_ = 0.0;
  Vec c_;
  double const_ = 0.0;
  double grad_terms_ = 0.0;
};

/// argmin f_k = x0 - sqrt(2 / (C ||c||)) c, or x0 when c = 0.
Vec estimating_min(const EstimatingState& state);

/// Which iterate a run reports as its small-gradient point.
enum class Selection {
  kComposedGradient,        ///< min ||grad f_s(x_k)||
  kBaseGradient,            ///< min ||grad f(x_k)||
  kBaseGradientOfBestValue  ///< min ||grad f(z_k)||, z_k the lowest-f_s iterate seen so far
};

struct RunOptions {
  /// Run N more iterations after the first N and select over k in (N, 2N]
  /// instead of [1, N].
  bool extra_window = false;
  Selection selection = Selection::kComposedGradient;
  /// Relative tolerance handed to the cubic step (scaled by max(1, ||g||)).
  double cubic_tol = 1e-10;
  /// Accelerated cubic Newton only: evaluate the estimating-function
  /// relations every iteration (uncounted oracle calls).
  bool check_relations = false;
  int relation_samples = 20;
  std::uint64_t seed = 1;
  /// Copied into trace rows.
  int epoch = 1;
  double sigma = 0.0;
  bool record_wall_time = false;
  bool keep_iterates = false;
  /// Adaptive runs: a known smoothness constant (e.g. of a regularizer)
  /// added to the running estimate before every step.
  double known_lipschitz = 0.0;
  /// Ends the run at the first iterate whose base gradient norm is at most
  /// this value; that iterate becomes both x_out and x_best. 0 disables.
  double stop_gradient = 0.0;
};

struct IterateRecord {
  int k = 0;
  Vec x;
  double f_s = 0.0;
  double grad_fs_norm = 0.0;
  double f = 0.0;
  double grad_norm = 0.0;
  double L = 0.0;
};

/// Largest normalized residuals of the two estimating-function relations
/// (positive means violated) and how often each exceeded the slack.
struct RelationStats {
  double max_r1 = -std::numeric_limits<double>::infinity();
  double max_r2 = -std::numeric_limits<double>::infinity();
  int r1_violations = 0;
  int r2_violations = 0;
  int checks = 0;
  double slack = 1e-8;
};

struct SubroutineResult {
  Vec x_out;  ///< x_N
  Evaluation at_out;
  Vec x_best;
  Vec grad_fs_at_best;
  Vec grad_f_at_best;
  double f_at_best = 0.0;
  int best_iter = 0;
  int N = 0;
  int iterations = 0;
  double L_out = 0.0;  ///< estimate at iteration N (the constant used, for fixed-step runs)
  double L_at_N = 0.0;
  double L_at_2N = 0.0;
  bool stopped_early = false;
  RelationStats relations;
  std::vector<IterateRecord> iterates;
  RunTrace trace;
};

/// Parameters M = 2L, C = 12L/(sqrt2 - 1)^2 from a Hessian Lipschitz constant.
/// L is raised to `floor` so that L = 0 (quadratics) still gives a well-posed step.
struct AcnmParams {
  double L = 0.0;
  double M = 0.0;
  double C = 0.0;

  static AcnmParams from_lipschitz(double L3, double floor = 1e-12);
};

/**
 * Accelerated cubic regularization of Newton's method: x_1 = T_L(x_0), then
 * N-1 accelerated steps x_{k+1} = T_M(y_k). Throws Error(kDivergence) when
 * f rises by more than 1e6 max(1, |f(x_0)|).
 */
SubroutineResult acnm_run(Oracle& oracle, const Vec& x0, const AcnmParams& params, int N,
                          const RunOptions& opt = {});

/// Accelerated gradient method with step 1/L (similar-triangles form).
SubroutineResult agd_run(Oracle& oracle, const Vec& x0, double L, int N, const RunOptions& opt = {});

/// Fixed N, or the smallest k with k >= 8 [L_k (p+nu) / (4 sigma)]^{1/(p+nu)} + 1.
struct StopRule {
  enum class Kind { kFixed, kSmallestK };
  Kind kind = Kind::kFixed;
  int N = 1;
  double sigma = 0.0;
  double pnu = 3.0;
  int max_iters = 1000000;

  static StopRule fixed(int N);
  static StopRule smallest_k(double sigma, double pnu, int max_iters = 1000000);
};

/**
 * Order-p accelerated method with backtracking on its smoothness estimate:
 * every iteration halves the estimate once, then doubles it until the
 * sufficient-decrease test passes. p = 1 uses the quadratic upper model,
 * p = 2 the cubic model. Throws Error(kLineSearchRunaway) if the estimate
 * exceeds 1e12 * L_init.
 */
SubroutineResult adaptive_run(Oracle& oracle, const Vec& x0, double L_init, const StopRule& stop, int p,
                              const RunOptions& opt = {});

enum class Contract {
  kHoelder,      ///< fixed schedule, Hoelder-smooth rates
  kLipschitz,    ///< fixed schedule, Lipschitz rates
  kLineSearch,   ///< adaptive runs, rates in terms of the recorded estimates
};

const char* to_string(Contract c);

struct ContractInputs {
  Vec x0;
  Vec x_star;  ///< minimizer of the objective the run was applied to
  double f_star = 0.0;
  double L = 0.0;
  int p = 2;
  double nu = 1.0;
  double C_A = 1.0;  ///< claimed constant
  int N = 0;         ///< window is (N, 2N]; 0 skips the gradient clause
};

struct ContractClause {
  std::string name;
  int checked = 0;
  int held = 0;
  double measured_constant = 0.0;  ///< smallest constant making every checked instance hold
};

struct ContractReport {
  Contract contract = Contract::kHoelder;
  std::vector<ContractClause> clauses;
  bool all_held() const;
};

/// Evaluates the function-gap and window-gradient clauses of a contract on recorded iterates.
ContractReport check_contract(const std::vector<IterateRecord>& iterates, Contract c,
                              const ContractInputs& in);

}  // namespace argmin
