#include "argmin/framework.hpp"

#include <cmath>

#include "argmin/error.hpp"

namespace argmin {

namespace {

// ceil with a little give so that exact powers do not round up a whole step.
int ceil_count(double x) { return static_cast<int>(std::ceil(x - 1e-9)); }

std::array<std::int64_t, 3> calls_since(const Oracle& o, const std::array<std::int64_t, 3>& start) {
  const auto& now = o.counter().all();
  return {now[0] - start[0], now[1] - start[1], now[2] - start[2]};
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw Error(ErrorCode::kInvalidArgument, std::string(what) + " must be positive and finite");
}

void clamp_epochs(EpochSchedule& sch, double raw_S) {
  sch.S = ceil_count(raw_S);
  if (sch.S <= 1) {
    sch.S = 1;
    sch.clamped = true;
    sch.note = "target accuracy already at the smoothness scale; using a single epoch";
  }
}

}  // namespace

int EpochSchedule::total_iterations() const {
  int total = 0;
  for (int n : epoch_lengths) total += n;
  return total;
}

EpochSchedule schedule_cubic(double eps, double D, double L3) {
  require_positive(eps, "eps");
  require_positive(D, "D");
  require_positive(L3, "L3");
  EpochSchedule sch;
  clamp_epochs(sch, std::log(L3 * D * D / eps) / std::log(4.0) + 1.0);
  for (int s = 1; s <= sch.S; ++s) {
    const double sigma = std::pow(4.0, s - 2) * eps / (D * D);
    sch.sigmas.push_back(sigma);
    sch.epoch_lengths.push_back(
        static_cast<int>(std::ceil(4.0 * std::cbrt(480.0 * (L3 + 4.0 * sigma) / sigma))));
  }
  return sch;
}

const char* to_string(Regime r) {
  switch (r) {
    case Regime::kHoelder: return "hoelder";
    case Regime::kLipschitz: return "lipschitz";
  }
  return "unknown";
}

EpochSchedule schedule_general(double eps, double D, double L, int p, double nu, double C_A, Regime regime) {
  require_positive(eps, "eps");
  require_positive(D, "D");
  require_positive(L, "L");
  if (p < 1 || !(nu >= 0.0 && nu <= 1.0) || p + nu < 2.0)
    throw Error(ErrorCode::kInvalidArgument, "schedule needs p >= 1, nu in [0, 1] and p + nu >= 2");
  if (!(C_A >= 1.0)) throw Error(ErrorCode::kInvalidArgument, "C_A must be >= 1");

  EpochSchedule sch;
  const double pnu = p + nu;
  if (regime == Regime::kHoelder) {
    const double scale = C_A * std::pow(4.0, pnu - 2.0) * std::pow(D, pnu - 1.0);
    clamp_epochs(sch, std::log(scale * L / eps) / std::log(std::pow(2.0, pnu - 1.0)) + 1.0);
    for (int s = 1; s <= sch.S; ++s) {
      const double sigma = std::pow(2.0, (pnu - 1.0) * (s - 1)) * eps / scale;
      sch.sigmas.push_back(sigma);
      const double base = std::pow(2.0, pnu - 2.0) * pnu * C_A * L / sigma;
      sch.epoch_lengths.push_back(static_cast<int>(std::ceil(4.0 * std::pow(base, 1.0 / pnu))) + 1);
    }
  } else {
    const double rate = (3.0 * p + 1.0) / 2.0;
    const double scale = C_A * std::pow(D, p);
    clamp_epochs(sch, std::log2(scale * L / eps) / rate + 1.0);
    for (int s = 1; s <= sch.S; ++s) {
      const double sigma = std::pow(2.0, (s - 1) * rate) * eps / scale;
      sch.sigmas.push_back(sigma);
      const double base = (p + 1.0) * C_A * L / sigma;
      sch.epoch_lengths.push_back(std::max(1, static_cast<int>(std::ceil(4.0 * std::pow(base, 1.0 / rate)))));
    }
  }
  return sch;
}

const char* to_string(SubroutineKind k) {
  switch (k) {
    case SubroutineKind::kAcnm: return "acnm";
    case SubroutineKind::kAgd: return "agd";
  }
  return "unknown";
}

double regularizer_smoothness_factor(double power) {
  if (power == 2.0) return 1.0;
  if (power == 3.0) return 4.0;
  throw Error(ErrorCode::kInvalidArgument,
              "only regularizer powers 2 and 3 are supported by the subroutines (got " + format_double(power) + ")");
}

ARResult ar_run(std::shared_ptr<const Oracle> base, const Vec& x0, const EpochSchedule& sched,
                const ArOptions& opt) {
  if (sched.S < 1 || static_cast<int>(sched.sigmas.size()) != sched.S ||
      static_cast<int>(sched.epoch_lengths.size()) != sched.S)
    throw Error(ErrorCode::kInvalidArgument, "ar_run: malformed schedule");
  if (opt.nu != 1.0) throw Error(ErrorCode::kInvalidArgument, "ar_run: subroutines need nu = 1");
  if ((opt.sub == SubroutineKind::kAcnm) != (opt.p == 2) || (opt.sub == SubroutineKind::kAgd) != (opt.p == 1))
    throw Error(ErrorCode::kInvalidArgument, "ar_run: subroutine order does not match p");
  if (!(opt.L >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "ar_run: L must be >= 0");

  const double power = opt.p + opt.nu;
  const double factor = regularizer_smoothness_factor(power);
  const auto start = base->counter().all();

  ARResult res;
  res.schedule_used = sched;
  Vec x = x0;
  double prev_sigma = 0.0;
  for (int s = 1; s <= sched.S; ++s) {
    const double sigma = sched.sigmas[s - 1];
    const int N = sched.epoch_lengths[s - 1];
    res.stack.push(x, sigma - prev_sigma, power);
    prev_sigma = sigma;
    auto comp = compose(base, res.stack);

    RunOptions ro;
    ro.epoch = opt.epoch_offset + s;
    ro.sigma = sigma;
    ro.cubic_tol = opt.cubic_tol;
    ro.stop_gradient = opt.stop_gradient;
    ro.check_relations = opt.check_relations;
    ro.seed = opt.seed + static_cast<std::uint64_t>(s);
    ro.record_wall_time = opt.record_wall_time;
    ro.keep_iterates = opt.keep_iterates;
    const bool last = s == sched.S;
    if (last) {
      ro.extra_window = true;
      ro.selection = Selection::kBaseGradient;
    }

    const auto epoch_start = base->counter().all();
    SubroutineResult r;
    try {
      const double L = opt.L + factor * sigma;
      r = opt.sub == SubroutineKind::kAcnm ? acnm_run(*comp, x, AcnmParams::from_lipschitz(L), N, ro)
                                           : agd_run(*comp, x, L, N, ro);
    } catch (const Error& e) {
      throw AbortedRun(e, res.trace, s);
    }
    res.trace.append(r.trace);
    res.epochs.push_back(EpochRecord{s, sigma, N, x, r.x_out, r.L_at_N, r.L_at_2N, calls_since(*base, epoch_start),
                                     std::move(r.iterates)});
    if (last || r.stopped_early) {
      res.x_hat = r.x_best;
      res.grad_fs_at_x_hat = r.grad_fs_at_best;
      res.stopped_early = r.stopped_early;
      if (r.stopped_early) break;
    }
    x = r.x_out;
  }
  res.grad_f_at_x_hat = base->audit(res.x_hat, 1).g;
  res.total_calls = calls_since(*base, start);
  return res;
}

ARResult ar_parameter_free(std::shared_ptr<const Oracle> base, const Vec& x0, double sigma1, double L0,
                           const ParamFreeOptions& opt) {
  require_positive(sigma1, "sigma1");
  require_positive(L0, "L0");
  if (opt.nu != 1.0 || (opt.p != 1 && opt.p != 2))
    throw Error(ErrorCode::kInvalidArgument, "ar_parameter_free: adaptive subroutines need p in {1, 2} and nu = 1");
  const double pnu = opt.p + opt.nu;
  const double factor = regularizer_smoothness_factor(pnu);
  const auto start = base->counter().all();

  ARResult res;
  if (sigma1 > opt.c_A)
    res.warnings.push_back("sigma1 = " + format_double(sigma1) + " exceeds the subroutine constant c_A = " +
                           format_double(opt.c_A));
  Vec x = x0;
  double sigma = sigma1;
  double prev_sigma = 0.0;
  double L_init = L0;
  for (int s = 1; s <= opt.max_epochs; ++s) {
    if (s > 1) sigma *= std::pow(2.0, pnu - 1.0);
    res.stack.push(x, sigma - prev_sigma, pnu);
    prev_sigma = sigma;
    auto comp = compose(base, res.stack);

    RunOptions ro;
    ro.epoch = opt.epoch_offset + s;
    ro.sigma = sigma;
    ro.cubic_tol = opt.cubic_tol;
    ro.extra_window = true;
    ro.selection = Selection::kBaseGradientOfBestValue;
    ro.known_lipschitz = factor * sigma;
    ro.record_wall_time = opt.record_wall_time;
    ro.keep_iterates = opt.keep_iterates;

    const auto epoch_start = base->counter().all();
    SubroutineResult r;
    try {
      r = adaptive_run(*comp, x, L_init, StopRule::smallest_k(sigma, pnu, opt.max_inner_iters), opt.p, ro);
    } catch (const Error& e) {
      throw AbortedRun(e, res.trace, s);
    }
    res.trace.append(r.trace);
    res.schedule_used.S = s;
    res.schedule_used.sigmas.push_back(sigma);
    res.schedule_used.epoch_lengths.push_back(r.N);
    const double L_N = r.L_at_N;
    const double L_2N = r.L_at_2N;
    res.epochs.push_back(EpochRecord{s, sigma, r.N, x, r.x_out, L_N, L_2N, calls_since(*base, epoch_start),
                                     std::move(r.iterates)});
    x = r.x_out;
    L_init = L_N;

    // sigma_s >= L_2N^{(p+nu)^2} / L_N^{(p+nu-1)(p+nu+1)}, compared in logs.
    const double log_rhs = pnu * pnu * std::log(L_2N) - (pnu - 1.0) * (pnu + 1.0) * std::log(L_N);
    if (std::log(sigma) >= log_rhs) {
      res.x_hat = r.x_best;
      res.grad_fs_at_x_hat = r.grad_fs_at_best;
      res.grad_f_at_x_hat = base->audit(res.x_hat, 1).g;
      res.total_calls = calls_since(*base, start);
      return res;
    }
  }
  throw AbortedRun(Error(ErrorCode::kEpochCap, "termination rule not met within " +
                                                   std::to_string(opt.max_epochs) + " epochs"),
                   res.trace, opt.max_epochs);
}

GuessCheckResult guess_and_check_D(std::shared_ptr<const Oracle> base, const Vec& x0, double eps, double L0,
                                   const ParamFreeOptions& opt, int max_rounds) {
  require_positive(eps, "eps");
  require_positive(L0, "L0");
  const double pnu = opt.p + opt.nu;
  if (!(pnu > 1.0)) throw Error(ErrorCode::kInvalidArgument, "guess_and_check_D needs p + nu > 1");
  const auto start = base->counter().all();

  GuessCheckResult out;
  {
    // Two adaptive iterations on the unregularized objective.
    auto plain = compose(base, RegularizerStack{});
    const SubroutineResult r = adaptive_run(*plain, x0, L0, StopRule::fixed(2), opt.p);
    out.D0 = std::pow(r.at_out.g.norm() / r.L_at_N, 1.0 / (pnu - 1.0));
    if (out.D0 == 0.0) {
      out.ar.x_hat = r.x_out;
      out.ar.grad_f_at_x_hat = r.at_out.base_g;
      out.ar.grad_fs_at_x_hat = r.at_out.g;
      out.ar.trace = r.trace;
      out.total_calls = calls_since(*base, start);
      out.ar.total_calls = out.total_calls;
      return out;
    }
  }

  double D = out.D0;
  for (int t = 1; t <= max_rounds; ++t) {
    D *= 4.0;
    out.guesses.push_back(D);
    out.rounds = t;
    const double sigma1 = eps / (3.0 * std::pow(9.0 * D, pnu - 1.0));
    out.ar = ar_parameter_free(base, x0, sigma1, L0, opt);
    const double g = out.ar.grad_f_at_x_hat.norm();
    out.grad_norms.push_back(g);
    if (g <= eps) {
      out.total_calls = calls_since(*base, start);
      return out;
    }
  }
  throw Error(ErrorCode::kEpochCap, "gradient target not met within " + std::to_string(max_rounds) + " rounds");
}

}  // namespace argmin
