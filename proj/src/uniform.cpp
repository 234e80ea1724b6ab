#include "argmin/uniform.hpp"

#include <cmath>

#include "argmin/error.hpp"
#include "argmin/problems.hpp"

namespace argmin {

namespace {

std::array<std::int64_t, 3> calls_since(const Oracle& o, const std::array<std::int64_t, 3>& start) {
  const auto& now = o.counter().all();
  return {now[0] - start[0], now[1] - start[1], now[2] - start[2]};
}

// Counted gradient of the base objective.
Vec base_gradient(const std::shared_ptr<const Oracle>& base, const Vec& x) {
  auto plain = compose(base, RegularizerStack{});
  return plain->evaluate(x, 1).g;
}

void check_inputs(double sigma, double eps, int p) {
  if (!(sigma > 0.0) || !(eps > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "uniform restarts need sigma > 0 and eps > 0");
  if (p != 1 && p != 2) throw Error(ErrorCode::kInvalidArgument, "uniform restarts support p = 1 and p = 2");
}

}  // namespace

double epoch_length_raw(double grad_norm, double L, double sigma_q, int p, double q) {
  if (!(grad_norm > 0.0) || !(L > 0.0) || !(sigma_q > 0.0) || p < 1 || !(q >= 2.0))
    throw Error(ErrorCode::kInvalidArgument, "epoch length needs positive inputs, p >= 1 and q >= 2");
  const double denom = 3.0 * p + 1.0;
  const double m = std::pow(q * L / sigma_q, 2.0 / denom) *
                   std::pow(q * grad_norm / (2.0 * sigma_q), 2.0 * (p - q + 1.0) / (denom * (q - 1.0)));
  return std::max(m, 1.0);
}

int epoch_length_mk(double grad_norm, double L, double sigma_q, int p, double q) {
  return static_cast<int>(std::ceil(epoch_length_raw(grad_norm, L, sigma_q, p, q) - 1e-12));
}

RestartResult restart_uniform(std::shared_ptr<const Oracle> base, const Vec& x0, double L, double sigma_q, int p,
                              double q, double eps, const RestartOptions& opt) {
  check_inputs(sigma_q, eps, p);
  if (!(L > 0.0)) throw Error(ErrorCode::kInvalidArgument, "restart_uniform: L must be positive");
  if (!(q >= 2.0)) throw Error(ErrorCode::kInvalidArgument, "restart_uniform: q must be >= 2");
  if (opt.safety_factor < 1) throw Error(ErrorCode::kInvalidArgument, "restart_uniform: safety_factor must be >= 1");
  const auto start = base->counter().all();

  RestartResult res;
  res.trace = RunTrace(opt.record_wall_time);
  Vec x = x0;
  Vec g = base_gradient(base, x);
  res.grad_norm_history.push_back(g.norm());
  int inner_epochs = 0;

  ArOptions ao;
  ao.sub = p == 2 ? SubroutineKind::kAcnm : SubroutineKind::kAgd;
  ao.p = p;
  ao.L = L;
  ao.cubic_tol = opt.cubic_tol;
  ao.record_wall_time = opt.record_wall_time;

  for (int k = 1; g.norm() > eps; ++k) {
    if (k > opt.max_epochs)
      throw Error(ErrorCode::kEpochCap, "restart_uniform: eps not reached within " +
                                            std::to_string(opt.max_epochs) + " restarts");
    RestartEpoch ep;
    ep.k = k;
    ep.grad_norm_in = g.norm();
    ep.m_raw = epoch_length_raw(ep.grad_norm_in, L, sigma_q, p, q);
    ep.m_k = epoch_length_mk(ep.grad_norm_in, L, sigma_q, p, q);
    ep.D = distance_bound_from_gradient(ep.grad_norm_in, q, sigma_q);
    ep.sigma_estimate = sigma_q;
    // Gradient reachable in m iterations: L D^p / m^{(3p+1)/2}. It equals
    // ||nu_{k-1}|| / 2 until m is capped at 1.
    ep.inner_target = L * std::pow(ep.D, p) / std::pow(ep.m_raw, (3.0 * p + 1.0) / 2.0);
    const double target = ep.grad_norm_in / 2.0;
    const EpochSchedule sched = schedule_general(ep.inner_target, ep.D, L, p, 1.0, opt.C_A, opt.regime);
    ao.stop_gradient = target;

    const auto epoch_start = base->counter().all();
    for (int pass = 0; pass < opt.safety_factor && !ep.halved; ++pass) {
      ao.epoch_offset = inner_epochs;
      const ARResult r = ar_run(base, x, sched, ao);
      inner_epochs += static_cast<int>(r.epochs.size());
      ep.inner_iterations += static_cast<int>(r.trace.rows().size());
      res.trace.append(r.trace);
      x = r.x_hat;
      g = r.grad_f_at_x_hat;
      ep.halved = g.norm() <= target;
    }
    ep.x_out = x;
    ep.grad_norm_out = g.norm();
    ep.calls = calls_since(*base, epoch_start);
    res.epochs.push_back(ep);
    res.grad_norm_history.push_back(g.norm());
    if (!ep.halved)
      throw Error(ErrorCode::kHalvingFailure,
                  "restart " + std::to_string(k) + ": gradient norm went from " + format_double(ep.grad_norm_in) +
                      " to " + format_double(ep.grad_norm_out) + " in " + std::to_string(opt.safety_factor) +
                      " passes; sigma_q may be too large");
  }
  res.x_hat = x;
  res.grad_f_at_x_hat = g;
  res.total_calls = calls_since(*base, start);
  return res;
}

RestartResult pf_uniform(std::shared_ptr<const Oracle> base, const Vec& x0, double sigma0, double L0, int p,
                         double eps, const PfUniformOptions& opt) {
  check_inputs(sigma0, eps, p);
  if (!(L0 > 0.0)) throw Error(ErrorCode::kInvalidArgument, "pf_uniform: L0 must be positive");
  const auto start = base->counter().all();

  ParamFreeOptions inner = opt.inner;
  inner.p = p;
  inner.nu = 1.0;
  const double c_p = 3.0 * (p + 1.0) * std::pow(9.0, p);

  RestartResult res;
  res.trace = RunTrace(inner.record_wall_time);
  Vec x = x0;
  Vec g = base_gradient(base, x);
  res.grad_norm_history.push_back(g.norm());
  double sigma = sigma0;
  double L = L0;
  int inner_epochs = 0;

  for (int t = 1; g.norm() > eps; ++t) {
    if (t > opt.max_rounds)
      throw Error(ErrorCode::kEpochCap,
                  "pf_uniform: eps not reached within " + std::to_string(opt.max_rounds) + " rounds");
    RestartEpoch ep;
    ep.k = t;
    ep.grad_norm_in = g.norm();
    ep.sigma_estimate = sigma;

    const auto epoch_start = base->counter().all();
    inner.epoch_offset = inner_epochs;
    const ARResult r = ar_parameter_free(base, x, sigma / c_p, L, inner);
    inner_epochs += static_cast<int>(r.epochs.size());
    ep.inner_iterations = static_cast<int>(r.trace.rows().size());
    res.trace.append(r.trace);
    x = r.x_hat;
    g = r.grad_f_at_x_hat;
    L = r.epochs.back().L_at_N;

    ep.x_out = x;
    ep.grad_norm_out = g.norm();
    ep.halved = ep.grad_norm_out <= ep.grad_norm_in / 2.0;
    if (!ep.halved) {
      sigma /= 4.0;
      ep.quartered = true;
      ++res.quartering_events;
    }
    ep.calls = calls_since(*base, epoch_start);
    res.epochs.push_back(ep);
    res.grad_norm_history.push_back(g.norm());
  }
  res.x_hat = x;
  res.grad_f_at_x_hat = g;
  res.total_calls = calls_since(*base, start);
  return res;
}

}  // namespace argmin
