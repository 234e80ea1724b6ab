#include "argmin/cubic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "argmin/error.hpp"

namespace argmin {

namespace {

constexpr int kMaxSecularIters = 200;

// Coefficients whose magnitude falls below this fraction of ||g|| on the
// lambda_min eigenspace are treated as zero when testing for the hard case.
constexpr double kHardCaseRelTol = 1e-13;

// Eigenvalues within this relative distance of lambda_min share its eigenspace.
constexpr double kEigenspaceRelTol = 1e-12;

// Shifted eigenvalues d_i(t) = base_i + (M/2) t, parametrized by t = r - r_min.
// Writing the shift this way keeps d_i accurate when r is close to r_min.
struct ShiftedSpectrum {
  Vec base;
  double r_min = 0.0;
  double half_m = 0.0;

  double d(Eigen::Index i, double t) const { return base(i) + half_m * t; }
};

struct SecularEval {
  double hnorm = 0.0;
  double chi = 0.0;
  double dchi = 0.0;
};

// chi(t) = 1/||h(t)|| - 1/(r_min + t) is increasing in t and its root is the
// step length. It is close to linear near the root, which suits Newton.
SecularEval eval_chi(const ShiftedSpectrum& s, const Vec& c, const std::vector<bool>& active,
                     double t) {
  double sum2 = 0.0;
  double sum3 = 0.0;
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    if (!active[static_cast<size_t>(i)] || c(i) == 0.0) continue;
    const double di = s.d(i, t);
    const double q = c(i) / di;
    sum2 += q * q;
    sum3 += q * q / di;
  }
  SecularEval out;
  out.hnorm = std::sqrt(sum2);
  const double r = s.r_min + t;
  const double inv_r = r > 0.0 ? 1.0 / r : std::numeric_limits<double>::infinity();
  if (out.hnorm == 0.0) {
    out.chi = std::numeric_limits<double>::infinity();
    out.dchi = 0.0;
    return out;
  }
  out.chi = 1.0 / out.hnorm - inv_r;
  out.dchi = s.half_m * sum3 / (sum2 * out.hnorm) + inv_r * inv_r;
  return out;
}

double phi_value(const EigDecomp& e, const Vec& c, double M, double r) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    if (c(i) == 0.0) continue;
    const double q = c(i) / (e.eigvals(i) + 0.5 * M * r);
    sum += q * q;
  }
  return sum - r * r;
}

}  // namespace

const char* to_string(SecularBranch b) {
  switch (b) {
    case SecularBranch::kZero:
      return "zero";
    case SecularBranch::kInterior:
      return "interior";
    case SecularBranch::kHard:
      return "hard";
  }
  return "unknown";
}

double CubicModel::value(const Vec& h) const {
  return g.dot(h) + 0.5 * h.dot(H * h) + (M / 6.0) * std::pow(h.norm(), 3);
}

double default_cubic_tol(const Vec& g) { return 1e-10 * std::max(1.0, g.norm()); }

SecularRoot secular_root(const EigDecomp& e, const Vec& g_coeffs, double M, double tol) {
  if (!(M > 0.0) || !std::isfinite(M))
    throw Error(ErrorCode::kInvalidArgument, "secular_root: M must be positive and finite");
  if (g_coeffs.size() != e.dim())
    throw Error(ErrorCode::kInvalidArgument, "secular_root: dimension mismatch");
  if (!all_finite(g_coeffs)) throw Error(ErrorCode::kNonFinite, "secular_root: coefficients");

  const Eigen::Index n = e.dim();
  const double lam_min = e.lambda_min();
  const double scale = std::max(1.0, e.eigvals.cwiseAbs().maxCoeff());
  const double gnorm = g_coeffs.norm();

  ShiftedSpectrum s;
  s.half_m = 0.5 * M;
  s.r_min = std::max(0.0, -lam_min / s.half_m);
  s.base.resize(n);
  for (Eigen::Index i = 0; i < n; ++i)
    s.base(i) = lam_min < 0.0 ? e.eigvals(i) - lam_min : e.eigvals(i);

  std::vector<bool> in_min_space(static_cast<size_t>(n));
  double c_min2 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    in_min_space[static_cast<size_t>(i)] = e.eigvals(i) - lam_min <= kEigenspaceRelTol * scale;
    if (in_min_space[static_cast<size_t>(i)]) c_min2 += g_coeffs(i) * g_coeffs(i);
  }

  SecularRoot out;
  if (gnorm == 0.0) {
    out.r = s.r_min;
    out.branch = s.r_min > 0.0 ? SecularBranch::kHard : SecularBranch::kZero;
    return out;
  }

  std::vector<bool> all(static_cast<size_t>(n), true);

  // Hard case: g carries (numerically) no weight on the lambda_min eigenspace
  // and the step built from the remaining directions is too short at r_min.
  if (lam_min < 0.0 && std::sqrt(c_min2) <= kHardCaseRelTol * gnorm) {
    std::vector<bool> perp(static_cast<size_t>(n));
    for (size_t i = 0; i < perp.size(); ++i) perp[i] = !in_min_space[i];
    const SecularEval at_min = eval_chi(s, g_coeffs, perp, 0.0);
    if (at_min.hnorm <= s.r_min) {
      out.r = s.r_min;
      out.branch = SecularBranch::kHard;
      return out;
    }
    all = perp;
    out.min_space_dropped = true;
  }

  const double r_up = 2.0 * std::abs(lam_min) / M + std::sqrt(2.0 * gnorm / M);
  double lo = 0.0;
  double hi = std::max(r_up - s.r_min, std::numeric_limits<double>::min());
  for (int k = 0; k < kMaxSecularIters && !(eval_chi(s, g_coeffs, all, hi).chi >= 0.0); ++k)
    hi *= 2.0;

  // Start from the left end whenever chi is finite there; Newton on a concave
  // increasing function then approaches the root from below without overshoot.
  double t = s.r_min > 0.0 ? 0.0 : 0.5 * hi;
  int it = 0;
  for (; it < kMaxSecularIters; ++it) {
    const SecularEval ev = eval_chi(s, g_coeffs, all, t);
    if (ev.chi == 0.0) break;
    if (ev.chi < 0.0)
      lo = t;
    else
      hi = t;
    const double r = s.r_min + t;
    const double err = std::abs(ev.hnorm - r);
    if (err * (ev.hnorm + r) <= 0.25 * tol &&
        err * s.half_m * ev.hnorm <= 0.25 * tol * std::max(1.0, gnorm))
      break;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, s.r_min + hi))
      break;
    double next = std::isfinite(ev.chi) && ev.dchi > 0.0 ? t - ev.chi / ev.dchi : lo - 1.0;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    t = next;
  }
  if (it == kMaxSecularIters) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "secular_root: no convergence after " << kMaxSecularIters << " iterations, bracket r in ["
        << s.r_min + lo << ", " << s.r_min + hi << "]";
    throw Error(ErrorCode::kNoConvergence, msg.str());
  }
  out.r = s.r_min + t;
  out.excess = t;
  out.iterations = it + 1;
  out.branch = SecularBranch::kInterior;
  out.phi = phi_value(e, g_coeffs, M, out.r);
  return out;
}

CubicSubproblem::CubicSubproblem(Vec g, SymMat H)
    : g_(std::move(g)), H_(std::move(H)), eig_(sym_eig(H_)) {
  if (g_.size() != H_.dim())
    throw Error(ErrorCode::kInvalidArgument, "cubic model: g and H dimensions differ");
  if (!all_finite(g_)) throw Error(ErrorCode::kNonFinite, "cubic model: gradient");
  coeffs_ = eig_.eigvecs.transpose() * g_;
}

CubicStepResult CubicSubproblem::solve(double M, double tol) const {
  if (!(tol > 0.0)) throw Error(ErrorCode::kInvalidArgument, "cubic_step: tol must be positive");
  const SecularRoot root = secular_root(eig_, coeffs_, M, tol);
  const Eigen::Index n = eig_.dim();
  const double lam_min = eig_.lambda_min();
  const double half_m = 0.5 * M;
  const double scale = std::max(1.0, eig_.eigvals.cwiseAbs().maxCoeff());
  auto in_min_space = [&](Eigen::Index i) {
    return eig_.eigvals(i) - lam_min <= kEigenspaceRelTol * scale;
  };

  Vec y = Vec::Zero(n);
  if (root.branch != SecularBranch::kZero) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (coeffs_(i) == 0.0) continue;
      if (root.min_space_dropped && in_min_space(i)) continue;
      const double di = lam_min < 0.0 ? (eig_.eigvals(i) - lam_min) + half_m * root.excess
                                      : eig_.eigvals(i) + half_m * root.r;
      if (di <= 0.0) continue;
      y(i) = -coeffs_(i) / di;
    }
  }
  if (root.branch == SecularBranch::kHard) {
    double perp2 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (in_min_space(i)) {
        y(i) = 0.0;
      } else {
        perp2 += y(i) * y(i);
      }
    }
    const double tau = std::sqrt(std::max(0.0, root.r * root.r - perp2));
    y(0) = coeffs_(0) > 0.0 ? -tau : tau;
  }

  CubicStepResult out;
  out.h = eig_.eigvecs * y;
  out.r = out.h.norm();
  out.secular_iters = root.iterations;
  out.branch = root.branch;
  const Vec resid = g_ + H_ * out.h + half_m * out.r * out.h;
  out.stationarity_residual = resid.norm();
  out.curvature_certificate = lam_min + half_m * out.r;
  out.model_value = g_.dot(out.h) + 0.5 * out.h.dot(H_ * out.h) + (M / 6.0) * out.r * out.r * out.r;
  if (!all_finite(out.h)) throw Error(ErrorCode::kNonFinite, "cubic_step: step");
  // Forming H h in floating point cannot be more accurate than this.
  const double roundoff = 64.0 * std::numeric_limits<double>::epsilon() *
                          (scale * out.r + half_m * out.r * out.r + g_.norm());
  if (out.stationarity_residual > tol * std::max(1.0, g_.norm()) + roundoff) {
    std::ostringstream msg;
    msg.precision(6);
    msg << "cubic_step: stationarity residual " << out.stationarity_residual << " exceeds tolerance "
        << tol * std::max(1.0, g_.norm()) << " (r = " << out.r << ")";
    throw Error(ErrorCode::kNoConvergence, msg.str());
  }
  return out;
}

CubicStepResult cubic_step(const CubicModel& m, double tol) {
  return CubicSubproblem(m.g, m.H).solve(m.M, tol);
}

}  // namespace argmin
