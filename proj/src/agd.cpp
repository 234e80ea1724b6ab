#include <cmath>

#include "argmin/error.hpp"
#include "argmin/subroutines.hpp"
#include "run_tracker.hpp"

namespace argmin {

SubroutineResult agd_run(Oracle& oracle, const Vec& x0, double L, int N, const RunOptions& opt) {
  if (N < 1) throw Error(ErrorCode::kInvalidArgument, "agd_run: N must be >= 1");
  if (!(L > 0.0)) throw Error(ErrorCode::kInvalidArgument, "agd_run: L must be positive");

  const Evaluation e0 = detail::eval_checked(oracle, x0, 1);
  detail::RunTracker tracker(oracle, opt, N, e0.f);

  Vec x = x0;
  Vec v = x0;
  double A = 0.0;
  for (int k = 0; !tracker.done(k); ++k) {
    const double a = (1.0 + std::sqrt(1.0 + 4.0 * L * A)) / (2.0 * L);
    const double A_next = A + a;
    const Vec y = (A * x + a * v) / A_next;
    const Evaluation ey = detail::eval_checked(oracle, y, 1);
    v -= a * ey.g;
    x = (A * x + a * v) / A_next;
    A = A_next;
    const Evaluation ex = detail::eval_checked(oracle, x, 1);
    tracker.observe(k + 1, x, ex, L);
  }
  return tracker.finish(L);
}

}  // namespace argmin
