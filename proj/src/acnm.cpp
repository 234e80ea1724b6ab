#include <cmath>
#include <random>

#include "argmin/cubic.hpp"
#include "argmin/error.hpp"
#include "argmin/subroutines.hpp"
#include "run_tracker.hpp"

namespace argmin {

EstimatingState::EstimatingState(Vec x0, double C) : x0_(std::move(x0)), C_(C) {
  if (!(C > 0.0)) throw Error(ErrorCode::kInvalidArgument, "estimating function needs C > 0");
  c_ = Vec::Zero(x0_.size());
}

void EstimatingState::init(double f1, double grad1_norm, double L_plus_M) {
  A_ = 1.0;
  c_.setZero();
  const double term = std::pow(grad1_norm, 1.5) / std::sqrt(L_plus_M);
  const_ = f1 + term;
  grad_terms_ = term;
}

void EstimatingState::add(double a, double f, const Vec& g, const Vec& x, double L_plus_M) {
  A_ += a;
  c_ += a * g;
  const_ += a * (f + g.dot(x0_ - x));
  grad_terms_ += A_ * std::pow(g.norm(), 1.5) / std::sqrt(L_plus_M);
}

void EstimatingState::set_C(double C) {
  if (!(C > 0.0)) throw Error(ErrorCode::kInvalidArgument, "estimating function needs C > 0");
  C_ = C;
}

double EstimatingState::value(const Vec& x) const {
  const Vec u = x - x0_;
  const double r = u.norm();
  return const_ + c_.dot(u) + C_ / 6.0 * r * r * r;
}

double EstimatingState::min_value() const {
  return const_ - (2.0 / 3.0) * std::sqrt(2.0 / C_) * std::pow(c_.norm(), 1.5);
}

Vec estimating_min(const EstimatingState& s) {
  const double cn = s.c().norm();
  if (cn == 0.0) return s.x0();
  return s.x0() - std::sqrt(2.0 / (s.C() * cn)) * s.c();
}

AcnmParams AcnmParams::from_lipschitz(double L3, double floor) {
  const double L = std::max(L3, floor);
  const double root = std::sqrt(2.0) - 1.0;
  return AcnmParams{L, 2.0 * L, 12.0 * L / (root * root)};
}

namespace {

// Random points around x0 at the scale the run has explored, plus the
// current iterate and the estimating-function minimizer.
std::vector<Vec> relation_points(std::mt19937_64& rng, const Vec& x0, const Vec& xk, const Vec& nu,
                                 int count) {
  std::vector<Vec> pts{xk, nu};
  const double scale = std::max({(xk - x0).norm(), (nu - x0).norm(), 1e-8});
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> ud(0.0, 2.0);
  while (static_cast<int>(pts.size()) < count) {
    Vec u(x0.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = nd(rng);
    pts.push_back(x0 + scale * ud(rng) * u.normalized());
  }
  return pts;
}

}  // namespace

SubroutineResult acnm_run(Oracle& oracle, const Vec& x0, const AcnmParams& prm, int N,
                          const RunOptions& opt) {
  if (N < 1) throw Error(ErrorCode::kInvalidArgument, "acnm_run: N must be >= 1");
  if (!(prm.M > 0.0) || !(prm.C > 0.0) || !(prm.L > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "acnm_run: L, M and C must be positive");
  const double LM = prm.L + prm.M;

  const Evaluation e0 = detail::eval_checked(oracle, x0, 2);
  detail::RunTracker tracker(oracle, opt, N, e0.f);
  std::mt19937_64 rng(opt.seed);

  EstimatingState state(x0, prm.C);
  Vec x = x0 + CubicSubproblem(e0.g, e0.H).solve(prm.L, opt.cubic_tol).h;
  Evaluation ex = detail::eval_checked(oracle, x, 1);
  state.init(ex.f, ex.g.norm(), LM);
  const double g1_term = std::pow(ex.g.norm(), 1.5) / std::sqrt(LM);

  auto record = [&](int k, const Vec& nu_next) {
    double r1 = std::numeric_limits<double>::quiet_NaN();
    double r2 = std::numeric_limits<double>::quiet_NaN();
    if (opt.check_relations) {
      RelationStats& rs = tracker.relations();
      const double fstar = state.min_value();
      r1 = (state.A() * ex.f + state.grad_norm_terms() - fstar) / std::max(1.0, std::abs(fstar));
      r2 = -std::numeric_limits<double>::infinity();
      for (const Vec& z : relation_points(rng, x0, x, nu_next, opt.relation_samples)) {
        const double rhs = state.A() * oracle.audit(z, 0).f +
                           (2.0 * prm.L + prm.C) / 6.0 * std::pow((z - x0).norm(), 3) + g1_term;
        r2 = std::max(r2, (state.value(z) - rhs) / std::max(1.0, std::abs(rhs)));
      }
      rs.checks++;
      rs.max_r1 = std::max(rs.max_r1, r1);
      rs.max_r2 = std::max(rs.max_r2, r2);
      if (r1 > rs.slack) rs.r1_violations++;
      if (r2 > rs.slack) rs.r2_violations++;
    }
    tracker.observe(k, x, ex, prm.M, r1, r2);
  };

  Vec nu = estimating_min(state);
  record(1, nu);
  for (int k = 1; !tracker.done(k); ++k) {
    const double a = 0.5 * (k + 1.0) * (k + 2.0);
    const double alpha = a / (state.A() + a);
    const Vec y = (1.0 - alpha) * x + alpha * nu;
    const Evaluation ey = detail::eval_checked(oracle, y, 2);
    x = y + CubicSubproblem(ey.g, ey.H).solve(prm.M, opt.cubic_tol).h;
    ex = detail::eval_checked(oracle, x, 1);
    state.add(a, ex.f, ex.g, x, LM);
    nu = estimating_min(state);
    record(k + 1, nu);
  }
  return tracker.finish(prm.M);
}

}  // namespace argmin
