#include <cmath>
#include <optional>

#include "argmin/cubic.hpp"
#include "argmin/error.hpp"
#include "argmin/subroutines.hpp"
#include "run_tracker.hpp"

namespace argmin {

StopRule StopRule::fixed(int N) {
  StopRule s;
  s.kind = Kind::kFixed;
  s.N = N;
  return s;
}

StopRule StopRule::smallest_k(double sigma, double pnu, int max_iters) {
  StopRule s;
  s.kind = Kind::kSmallestK;
  s.sigma = sigma;
  s.pnu = pnu;
  s.max_iters = max_iters;
  return s;
}

namespace {

constexpr double kRunawayFactor = 1e12;
constexpr double kEstimateFloor = 1e-12;

// Rounding allowance in the sufficient-decrease tests, relative to |f(y)|.
double decrease_slack(double fy) {
  return 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(fy));
}

class Backtracker {
 public:
  Backtracker(double L_init, double known) : est_(L_init), init_(L_init), known_(known) {}

  /// Halves the estimate ahead of a new step.
  void relax() {
    before_relax_ = est_;
    est_ = std::max(est_ / 2.0, kEstimateFloor);
  }
  /// Keeps the previous estimate when a step carried no information about it.
  void undo_relax() { est_ = std::max(est_, before_relax_); }
  void grow() {
    est_ *= 2.0;
    if (est_ > kRunawayFactor * init_)
      throw Error(ErrorCode::kLineSearchRunaway,
                  "smoothness estimate " + format_double(est_) + " exceeds 1e12 x initial " +
                      format_double(init_));
  }
  double estimate() const { return est_; }
  double total() const { return est_ + known_; }

 private:
  double est_;
  double before_relax_ = 0.0;
  double init_;
  double known_;
};

// Cubic-model acceptance at trial M: the value stays under the model and the
// gradient at y + h matches its second-order prediction to within (M/2)||h||^2.
// A predicted decrease below the rounding of f(y): y is optimal to working
// precision and no trial M can be told apart from another.
bool unresolvable(const Evaluation& ey, const CubicStepResult& s) {
  return -s.model_value <= decrease_slack(ey.f);
}

bool cubic_accept(const Evaluation& ey, const CubicStepResult& s, const Evaluation& ex, double M) {
  if (!(ex.f <= ey.f + s.model_value + decrease_slack(ey.f))) return false;
  if (unresolvable(ey, s)) return true;
  const Vec Hh = ey.H * s.h;
  const double mismatch = (ex.g - ey.g - Hh).norm();
  // Composed gradients are sums of parts that cancel near a minimizer, so the
  // rounding scale is set by the parts rather than by the sums.
  const double parts = ey.g.norm() + ey.base_g.norm() + ex.g.norm() + ex.base_g.norm() +
                       ey.H.matrix().norm() * s.r;
  const double noise = 16.0 * std::numeric_limits<double>::epsilon() * parts;
  return mismatch <= 0.5 * M * s.r * s.r + noise;
}

bool stop_now(const StopRule& stop, int k, double L_k) {
  if (stop.kind == StopRule::Kind::kFixed) return k >= stop.N;
  const double bound = 8.0 * std::pow(L_k * stop.pnu / (4.0 * stop.sigma), 1.0 / stop.pnu) + 1.0;
  return k >= bound;
}

void validate(const StopRule& stop, double L_init) {
  if (!(L_init > 0.0)) throw Error(ErrorCode::kInvalidArgument, "adaptive_run: L_init must be positive");
  if (stop.kind == StopRule::Kind::kFixed && stop.N < 1)
    throw Error(ErrorCode::kInvalidArgument, "adaptive_run: N must be >= 1");
  if (stop.kind == StopRule::Kind::kSmallestK && (!(stop.sigma > 0.0) || !(stop.pnu > 0.0)))
    throw Error(ErrorCode::kInvalidArgument, "adaptive_run: stopping rule needs sigma > 0 and p+nu > 0");
}

// Decides N once the stopping rule fires; returns true when the run is over.
bool advance(detail::RunTracker& tracker, const StopRule& stop, int k, double L_k) {
  if (!tracker.N_known()) {
    if (stop_now(stop, k, L_k)) {
      tracker.set_N(k, L_k);
    } else if (k >= stop.max_iters) {
      throw Error(ErrorCode::kNoConvergence,
                  "stopping rule did not fire within " + std::to_string(stop.max_iters) + " iterations");
    }
  }
  return tracker.done(k);
}

SubroutineResult adaptive_first_order(Oracle& oracle, const Vec& x0, double L_init, const StopRule& stop,
                                      const RunOptions& opt) {
  const Evaluation e0 = detail::eval_checked(oracle, x0, 1);
  detail::RunTracker tracker(oracle, opt, 0, e0.f);
  Backtracker bt(L_init, opt.known_lipschitz);

  Vec x = x0;
  Vec v = x0;
  double A = 0.0;
  for (int k = 1;; ++k) {
    if (k > 1) bt.relax();
    for (;;) {
      const double L = bt.total();
      const double a = (1.0 + std::sqrt(1.0 + 4.0 * L * A)) / (2.0 * L);
      const double A_next = A + a;
      const Vec y = (A * x + a * v) / A_next;
      const Evaluation ey = detail::eval_checked(oracle, y, 1);
      const Vec v_next = v - a * ey.g;
      const Vec x_next = (A * x + a * v_next) / A_next;
      const Evaluation ex = detail::eval_checked(oracle, x_next, 1);
      const Vec d = x_next - y;
      if (ex.f <= ey.f + ey.g.dot(d) + 0.5 * L * d.squaredNorm() + decrease_slack(ey.f)) {
        x = x_next;
        v = v_next;
        A = A_next;
        tracker.observe(k, x, ex, bt.estimate());
        break;
      }
      bt.grow();
    }
    if (advance(tracker, stop, k, bt.estimate())) break;
  }
  return tracker.finish(bt.estimate());
}

SubroutineResult adaptive_cubic(Oracle& oracle, const Vec& x0, double L_init, const StopRule& stop,
                                const RunOptions& opt) {
  const double root2 = (std::sqrt(2.0) - 1.0) * (std::sqrt(2.0) - 1.0);
  const Evaluation e0 = detail::eval_checked(oracle, x0, 2);
  detail::RunTracker tracker(oracle, opt, 0, e0.f);
  Backtracker bt(L_init, opt.known_lipschitz);

  auto C_for = [&](double M) { return 6.0 * M / root2; };

  // First step T_M(x0): backtrack on M with the decomposition at x0 reused.
  CubicSubproblem sub0(e0.g, e0.H);
  Vec x;
  Evaluation ex;
  for (;;) {
    const CubicStepResult s = sub0.solve(bt.total(), opt.cubic_tol);
    x = x0 + s.h;
    ex = detail::eval_checked(oracle, x, 1);
    if (cubic_accept(e0, s, ex, bt.total())) break;
    bt.grow();
  }
  EstimatingState state(x0, C_for(bt.total()));
  state.init(ex.f, ex.g.norm(), 1.5 * bt.total());
  tracker.observe(1, x, ex, bt.estimate());

  // Later steps: the extrapolation point y depends on C, so a trial M that
  // needs a larger C moves y and costs a fresh second-order call there.
  for (int k = 1; !advance(tracker, stop, k, bt.estimate()); ++k) {
    const double a = 0.5 * (k + 1.0) * (k + 2.0);
    const double alpha = a / (state.A() + a);
    bt.relax();
    std::optional<CubicSubproblem> sub;
    Vec y;
    Evaluation ey;
    for (;;) {
      if (!sub || C_for(bt.total()) > state.C()) {
        state.set_C(std::max(state.C(), C_for(bt.total())));
        y = (1.0 - alpha) * x + alpha * estimating_min(state);
        ey = detail::eval_checked(oracle, y, 2);
        sub.emplace(ey.g, ey.H);
      }
      const CubicStepResult s = sub->solve(bt.total(), opt.cubic_tol);
      const Vec x_next = y + s.h;
      Evaluation e_next = detail::eval_checked(oracle, x_next, 1);
      if (cubic_accept(ey, s, e_next, bt.total())) {
        if (unresolvable(ey, s)) bt.undo_relax();
        x = x_next;
        ex = std::move(e_next);
        break;
      }
      bt.grow();
    }
    state.add(a, ex.f, ex.g, x, 1.5 * bt.total());
    tracker.observe(k + 1, x, ex, bt.estimate());
  }
  return tracker.finish(bt.estimate());
}

}  // namespace

SubroutineResult adaptive_run(Oracle& oracle, const Vec& x0, double L_init, const StopRule& stop, int p,
                              const RunOptions& opt) {
  validate(stop, L_init);
  if (p == 1) return adaptive_first_order(oracle, x0, L_init, stop, opt);
  if (p == 2) return adaptive_cubic(oracle, x0, L_init, stop, opt);
  throw Error(ErrorCode::kInvalidArgument, "adaptive_run supports p = 1 and p = 2");
}

}  // namespace argmin
