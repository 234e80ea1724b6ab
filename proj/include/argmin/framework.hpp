#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "argmin/regularization.hpp"
#include "argmin/subroutines.hpp"

namespace argmin {

/// Regularization weights sigma_1 < ... < sigma_S and the epoch lengths N_s.
struct EpochSchedule {
  int S = 0;
  std::vector<double> sigmas;
  std::vector<int> epoch_lengths;
  /// Set when the target is already at the smoothness scale and a single epoch is used.
  bool clamped = false;
  std::string note;

  int total_iterations() const;
};

/**
 * Schedule for cubic-regularized epochs solved by accelerated cubic Newton:
 *   S = ceil(log4(L3 D^2 / eps)) + 1,  sigma_s = 4^{s-2} eps / D^2,
 *   N_s = ceil(4 (480 (L3 + 4 sigma_s) / sigma_s)^{1/3}).
 */
EpochSchedule schedule_cubic(double eps, double D, double L3);

enum class Regime { kHoelder, kLipschitz };

const char* to_string(Regime r);

/**
 * Schedule for a subroutine of order p on a nu-Hoelder objective.
 *
 * Hoelder:   sigma_s = 2^{(p+nu-1)(s-1)} eps / (C_A 4^{p+nu-2} D^{p+nu-1}),
 *            N_s = ceil(4 (2^{p+nu-2} (p+nu) C_A L / sigma_s)^{1/(p+nu)}) + 1.
 * Lipschitz: sigma_s = 2^{(s-1)(3p+1)/2} eps / (C_A D^p),
 *            N_s = ceil(4 ((p+1) C_A L / sigma_s)^{2/(3p+1)}).
 *
 * S is the smallest count whose last weight reaches the smoothness scale.
 */
EpochSchedule schedule_general(double eps, double D, double L, int p, double nu, double C_A, Regime regime);

enum class SubroutineKind { kAcnm, kAgd };

const char* to_string(SubroutineKind k);

struct EpochRecord {
  int s = 0;
  double sigma = 0.0;
  int N = 0;
  Vec x_start;
  Vec x_out;
  double L_at_N = 0.0;
  double L_at_2N = 0.0;
  std::array<std::int64_t, 3> calls{0, 0, 0};  ///< oracle calls spent in this epoch
  std::vector<IterateRecord> iterates;          ///< filled when iterates are kept
};

struct ARResult {
  Vec x_hat;
  /// Re-evaluated at x_hat on the base oracle.
  Vec grad_f_at_x_hat;
  /// Gradient of the last regularized objective at x_hat.
  Vec grad_fs_at_x_hat;
  RegularizerStack stack;
  EpochSchedule schedule_used;
  /// Oracle calls made by this run, by derivative order.
  std::array<std::int64_t, 3> total_calls{0, 0, 0};
  RunTrace trace;
  std::vector<EpochRecord> epochs;
  std::vector<std::string> warnings;
  /// Set when the run ended at the stop_gradient target before finishing the schedule.
  bool stopped_early = false;
};

struct ArOptions {
  SubroutineKind sub = SubroutineKind::kAcnm;
  int p = 2;
  double nu = 1.0;
  /// Smoothness constant of the base objective for the subroutine's steps:
  /// Hessian Lipschitz for cubic Newton, gradient Lipschitz for AGD.
  double L = 1.0;
  double cubic_tol = 1e-10;
  bool check_relations = false;
  std::uint64_t seed = 1;
  bool record_wall_time = false;
  bool keep_iterates = false;
  /// Stop at the first iterate with ||grad f|| at most this value (0 runs the whole schedule).
  double stop_gradient = 0.0;
  /// Added to the epoch column of trace rows.
  int epoch_offset = 0;
};

/**
 * Accumulative regularization with a fixed schedule: epoch s adds
 * (sigma_s - sigma_{s-1})/(p+nu) ||x - x_{s-1}||^{p+nu}, runs the subroutine
 * for N_s iterations from x_{s-1}, and in the last epoch runs N_S more and
 * returns the window iterate with the smallest base gradient.
 */
ARResult ar_run(std::shared_ptr<const Oracle> base, const Vec& x0, const EpochSchedule& sched,
                const ArOptions& opt);

struct ParamFreeOptions {
  int p = 2;
  double nu = 1.0;
  int max_epochs = 200;
  /// sigma_1 above this triggers a warning.
  double c_A = 1.0;
  double cubic_tol = 1e-10;
  int max_inner_iters = 1000000;
  bool record_wall_time = false;
  bool keep_iterates = false;
  /// Added to the epoch column of trace rows.
  int epoch_offset = 0;
};

/**
 * Accumulative regularization with adaptive subroutines and no smoothness
 * constant: sigma_s doubles by 2^{p+nu-1}, each epoch stops at the smallest
 * k with k >= 8 [L_{s,k} (p+nu) / (4 sigma_s)]^{1/(p+nu)} + 1 and runs N_s
 * more iterations, and the loop ends once
 *   sigma_s >= L_{s,2N}^{(p+nu)^2} / L_{s,N}^{(p+nu-1)(p+nu+1)}.
 * Throws Error(kEpochCap) after max_epochs.
 */
ARResult ar_parameter_free(std::shared_ptr<const Oracle> base, const Vec& x0, double sigma1, double L0,
                           const ParamFreeOptions& opt = {});

struct GuessCheckResult {
  ARResult ar;
  double D0 = 0.0;
  std::vector<double> guesses;     ///< D_t per round
  std::vector<double> grad_norms;  ///< ||grad f(x_hat)|| per round
  int rounds = 0;
  std::array<std::int64_t, 3> total_calls{0, 0, 0};
};

/**
 * Parameter-free AR with the distance guessed: D_0^{p+nu-1} = ||grad f(x^2)|| / L_2
 * from two adaptive iterations on f, then D_t = 4 D_{t-1} and
 * sigma_1 = eps / (3 (9 D_t)^{p+nu-1}) until ||grad f(x_hat)|| <= eps.
 * Throws Error(kEpochCap) after max_rounds.
 */
GuessCheckResult guess_and_check_D(std::shared_ptr<const Oracle> base, const Vec& x0, double eps, double L0,
                                   const ParamFreeOptions& opt = {}, int max_rounds = 60);

/// Smoothness constant per unit weight of (1/kappa)||x - c||^kappa in the
/// derivative the subroutine relies on: 1 (gradient) for kappa = 2 and
/// 4 (Hessian) for kappa = 3. Other powers are rejected.
double regularizer_smoothness_factor(double power);

/// Error raised when an epoch fails; carries the trace of the epochs that completed.
class AbortedRun : public Error {
 public:
  AbortedRun(const Error& cause, RunTrace partial, int failed_epoch)
      : Error(cause.code(), std::string("epoch ") + std::to_string(failed_epoch) + ": " + cause.what()),
        partial_(std::move(partial)),
        failed_epoch_(failed_epoch) {}

  const RunTrace& partial_trace() const { return partial_; }
  int failed_epoch() const { return failed_epoch_; }

 private:
  RunTrace partial_;
  int failed_epoch_;
};

}  // namespace argmin
