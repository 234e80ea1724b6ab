#include "run_tracker.hpp"

#include <cmath>

namespace argmin::detail {

Evaluation eval_checked(Oracle& oracle, const Vec& x, int order) {
  if (!all_finite(x)) throw Error(ErrorCode::kDivergence, "iterate has NaN/Inf entries");
  try {
    return oracle.evaluate(x, order);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kNonFinite)
      throw Error(ErrorCode::kDivergence, std::string("objective became non-finite: ") + e.what());
    throw;
  }
}

RunTracker::RunTracker(Oracle& oracle, const RunOptions& opt, int N, double f0)
    : oracle_(oracle), opt_(opt), N_(N), f0_(f0), trace_(opt.record_wall_time) {}

void RunTracker::offer(std::optional<Candidate>& slot, const Candidate& c) {
  if (!slot || c.metric < slot->metric) slot = c;
}

void RunTracker::observe(int k, const Vec& x, const Evaluation& e, double L, double r1, double r2) {
  if (e.f - f0_ > 1e6 * std::max(1.0, std::abs(f0_)))
    throw Error(ErrorCode::kDivergence, "objective rose from " + format_double(f0_) + " to " +
                                            format_double(e.f) + " at iteration " + std::to_string(k));
  TraceRow row;
  row.epoch = opt_.epoch;
  row.iter = k;
  row.f = e.base_f;
  row.grad_norm = e.base_g.norm();
  row.grad_fs_norm = e.g.norm();
  row.sigma = opt_.sigma;
  row.L_est = L;
  row.r1_residual = r1;
  row.r2_residual = r2;
  trace_.add(row, oracle_.counter());
  if (opt_.keep_iterates)
    iterates_.push_back(IterateRecord{k, x, e.f, e.g.norm(), e.base_f, e.base_g.norm(), L});

  const Candidate here{k, x, e.g, e.base_g, e.f, 0.0, e.base_f};
  if (!have_z_ || here.f < z_.f) {
    z_ = here;
    have_z_ = true;
  }
  Candidate cand;
  switch (opt_.selection) {
    case Selection::kComposedGradient:
      cand = here;
      cand.metric = e.g.norm();
      break;
    case Selection::kBaseGradient:
      cand = here;
      cand.metric = e.base_g.norm();
      break;
    case Selection::kBaseGradientOfBestValue:
      cand = z_;
      cand.metric = z_.grad_f.norm();
      break;
  }
  if (!N_known() || k <= N_)
    offer(prefix_best_, cand);
  else if (k <= 2 * N_)
    offer(window_best_, cand);

  if (opt_.stop_gradient > 0.0 && !stop_hit_ && e.base_g.norm() <= opt_.stop_gradient) stop_hit_ = here;

  last_k_ = k;
  last_x_ = x;
  last_eval_ = e;
  last_L_ = L;
  if (N_known() && k == N_) {
    out_x_ = x;
    out_eval_ = e;
    L_at_N_ = L;
  }
}

void RunTracker::set_N(int N, double L_at_N) {
  N_ = N;
  out_x_ = last_x_;
  out_eval_ = last_eval_;
  L_at_N_ = L_at_N;
}

bool RunTracker::done(int k) const {
  if (stop_hit_) return true;
  return N_known() && k >= (opt_.extra_window ? 2 * N_ : N_);
}

SubroutineResult RunTracker::finish(double L_at_2N) {
  SubroutineResult r;
  r.N = N_;
  r.iterations = last_k_;
  r.x_out = out_x_.size() ? out_x_ : last_x_;
  r.at_out = out_x_.size() ? out_eval_ : last_eval_;
  r.L_out = L_at_N_;
  r.L_at_N = L_at_N_;
  r.L_at_2N = L_at_2N;
  const std::optional<Candidate>& sel =
      stop_hit_ ? stop_hit_ : (opt_.extra_window && window_best_ ? window_best_ : prefix_best_);
  if (stop_hit_) {
    r.stopped_early = true;
    r.x_out = last_x_;
    r.at_out = last_eval_;
    if (!N_known()) r.L_at_N = r.L_out = last_L_;
  }
  if (sel) {
    r.x_best = sel->x;
    r.grad_fs_at_best = sel->grad_fs;
    r.grad_f_at_best = sel->grad_f;
    r.best_iter = sel->k;
    r.f_at_best = sel->f_base;
  }
  r.relations = relations_;
  r.iterates = std::move(iterates_);
  r.trace = std::move(trace_);
  return r;
}

}  // namespace argmin::detail
