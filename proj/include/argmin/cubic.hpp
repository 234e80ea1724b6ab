#pragma once

#include "argmin/linalg.hpp"

namespace argmin {

/// The cubically regularized second-order model
///   m(h) = <g, h> + 1/2 <H h, h> + (M/6) ||h||^3
/// whose global minimizer is the step T_M(x) - x.
struct CubicModel {
  Vec g;
  SymMat H;
  double M = 1.0;

  double value(const Vec& h) const;
};

enum class SecularBranch {
  kZero,      ///< g = 0 and H is PSD: h = 0.
  kInterior,  ///< r solves the secular equation with H + (M/2) r I positive definite.
  kHard,      ///< g has no weight on the lambda_min eigenspace; r sits on the boundary.
};

const char* to_string(SecularBranch b);

struct SecularRoot {
  double r = 0.0;
  /// r - max(0, -2 lambda_min / M), stored separately so it stays accurate near the boundary.
  double excess = 0.0;
  SecularBranch branch = SecularBranch::kZero;
  /// True when negligible coefficients on the lambda_min eigenspace were dropped.
  bool min_space_dropped = false;
  int iterations = 0;
  /// phi(r) = sum_i c_i^2 / (lambda_i + M r / 2)^2 - r^2 (interior branch), else 0.
  double phi = 0.0;
};

/**
 * Solves the secular equation of the cubic model in the variable r = ||h||.
 *
 * g_coeffs are the coordinates of g in the eigenbasis of `e`. The returned r
 * satisfies r >= max(0, -2 lambda_min / M). Throws Error(kNoConvergence) after
 * 200 safeguarded Newton/bisection steps.
 */
SecularRoot secular_root(const EigDecomp& e, const Vec& g_coeffs, double M, double tol);

struct CubicStepResult {
  Vec h;
  double r = 0.0;
  /// ||g + H h + (M/2) ||h|| h||
  double stationarity_residual = 0.0;
  /// lambda_min(H) + (M/2) ||h||; nonnegative for a global minimizer.
  double curvature_certificate = 0.0;
  int secular_iters = 0;
  SecularBranch branch = SecularBranch::kZero;
  double model_value = 0.0;
};

/// Default tolerance used by callers that do not choose one.
double default_cubic_tol(const Vec& g);

/**
 * A cubic model with the Hessian already decomposed, so the step can be
 * recomputed cheaply for several values of M (adaptive line searches do this).
 */
class CubicSubproblem {
 public:
  CubicSubproblem(Vec g, SymMat H);

  CubicStepResult solve(double M, double tol) const;

  const Vec& gradient() const { return g_; }
  const SymMat& hessian() const { return H_; }
  const EigDecomp& decomposition() const { return eig_; }

 private:
  Vec g_;
  SymMat H_;
  EigDecomp eig_;
  Vec coeffs_;
};

/// Global minimizer of the cubic model. Throws on non-convergence or if the
/// returned step misses the stationarity tolerance tol * max(1, ||g||).
CubicStepResult cubic_step(const CubicModel& m, double tol);

}  // namespace argmin
