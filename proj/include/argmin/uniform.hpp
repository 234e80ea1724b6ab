#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "argmin/framework.hpp"

namespace argmin {

/**
 * Unrounded restart length
 *   m = max{ (q L / sigma_q)^{2/(3p+1)} (q ||nu|| / (2 sigma_q))^{2(p-q+1)/((3p+1)(q-1))}, 1 }.
 */
double epoch_length_raw(double grad_norm, double L, double sigma_q, int p, double q);

/// ceil of epoch_length_raw.
int epoch_length_mk(double grad_norm, double L, double sigma_q, int p, double q);

/// One restart: the gradient norm it started from and the one it reached.
struct RestartEpoch {
  int k = 0;
  Vec x_out;
  double grad_norm_in = 0.0;
  double grad_norm_out = 0.0;
  double m_raw = 0.0;
  int m_k = 0;
  /// Distance bound (q ||nu_{k-1}|| / (2 sigma_q))^{1/(q-1)} handed to the inner schedule.
  double D = 0.0;
  /// Gradient target of the inner schedule, L D^p / m^{(3p+1)/2}.
  double inner_target = 0.0;
  /// Uniform-convexity estimate in force during the restart (parameter-free variant).
  double sigma_estimate = 0.0;
  bool halved = false;
  bool quartered = false;
  int inner_iterations = 0;
  std::array<std::int64_t, 3> calls{0, 0, 0};
};

struct RestartResult {
  Vec x_hat;
  Vec grad_f_at_x_hat;
  /// ||nu_0||, ||nu_1||, ... with one entry per restart after the first.
  std::vector<double> grad_norm_history;
  std::vector<RestartEpoch> epochs;
  int quartering_events = 0;
  std::array<std::int64_t, 3> total_calls{0, 0, 0};
  RunTrace trace;
};

struct RestartOptions {
  double cubic_tol = 1e-10;
  double C_A = 1.0;
  Regime regime = Regime::kLipschitz;
  /// A restart may use this many passes of its inner schedule before the
  /// missing halving is reported.
  int safety_factor = 4;
  int max_epochs = 200;
  bool record_wall_time = false;
};

/**
 * Restarted accumulative regularization for a degree-q uniformly convex f
 * with known sigma_q and smoothness L (Hessian Lipschitz for p = 2, gradient
 * Lipschitz for p = 1). Restart k runs the fixed-schedule framework from
 * x_{k-1} with D = (q ||nu_{k-1}|| / (2 sigma_q))^{1/(q-1)} and target
 * L D^p / m_k^{(3p+1)/2} (that is ||nu_{k-1}|| / 2 while m_k > 1), and
 * restarts as soon as the gradient norm halves.
 * Throws Error(kHalvingFailure) when a restart does not halve within
 * safety_factor passes, which points to a wrong sigma_q.
 */
RestartResult restart_uniform(std::shared_ptr<const Oracle> base, const Vec& x0, double L, double sigma_q, int p,
                              double q, double eps, const RestartOptions& opt = {});

struct PfUniformOptions {
  int max_rounds = 200;
  ParamFreeOptions inner;
};

/**
 * Parameter-free restarts for q = p + 1: round t runs the parameter-free
 * framework from x_{t-1} with sigma_1 = sigma_{t-1} / (3 (p+1) 9^p), carrying
 * over the final line-search estimate, and quarters sigma when the gradient
 * norm fails to halve. Stops once ||grad f|| <= eps; throws Error(kEpochCap)
 * after max_rounds.
 */
RestartResult pf_uniform(std::shared_ptr<const Oracle> base, const Vec& x0, double sigma0, double L0, int p,
                         double eps, const PfUniformOptions& opt = {});

}  // namespace argmin
