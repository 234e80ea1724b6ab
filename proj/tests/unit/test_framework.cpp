#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include <Eigen/Cholesky>

#include "argmin/framework.hpp"
#include "argmin/problems.hpp"
#include "argmin/regularization.hpp"
#include "oracles.hpp"

using namespace argmin;

namespace {

std::shared_ptr<const Problem> cubic_power(std::uint64_t seed) {
  GeneratorParams gp;
  gp.family = ProblemFamily::kCubicPower;
  gp.n = 5;
  gp.m = 8;
  return make_problem(generate_spec(gp, seed));
}

std::shared_ptr<const Problem> quadratic(std::uint64_t seed, double cond, Eigen::Index n = 10) {
  GeneratorParams gp;
  gp.family = ProblemFamily::kQuadratic;
  gp.n = n;
  gp.cond = cond;
  return make_problem(generate_spec(gp, seed));
}

std::shared_ptr<const Problem> power_norm(Eigen::Index n, double q) {
  ProblemSpec s;
  s.family = ProblemFamily::kPowerNorm;
  s.q = q;
  s.center = Vec::Zero(n);
  s.center(0) = 0.3;
  return make_problem(s);
}

std::shared_ptr<ProblemOracle> oracle(std::shared_ptr<const Problem> p) { return std::make_shared<ProblemOracle>(p); }

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

RegularizerStack prefix(const RegularizerStack& stack, size_t count) {
  RegularizerStack out;
  for (size_t i = 0; i < count; ++i) {
    const auto& t = stack.terms()[i];
    out.push(t.center, t.weight, t.power);
  }
  return out;
}

}  // namespace

TEST_CASE("cubic schedule at eps = 1e-3, D = 1, L3 = 1") {
  const EpochSchedule s = schedule_cubic(1e-3, 1.0, 1.0);
  CHECK(s.S == 6);
  CHECK_FALSE(s.clamped);
  REQUIRE(s.sigmas.size() == 6);
  CHECK(s.sigmas[0] == doctest::Approx(2.5e-4).epsilon(1e-14));
  CHECK(s.epoch_lengths[0] == 498);
  for (int i = 0; i + 1 < s.S; ++i) {
    CHECK(s.sigmas[i + 1] / s.sigmas[i] == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(s.epoch_lengths[i + 1] <= s.epoch_lengths[i]);
  }
  // Last weight reaches the smoothness scale: 4^{S-2} eps / D^2 = 0.256.
  CHECK(s.sigmas.back() == doctest::Approx(0.256).epsilon(1e-14));
  CHECK(s.total_iterations() == std::accumulate(s.epoch_lengths.begin(), s.epoch_lengths.end(), 0));
}

TEST_CASE("cubic schedule clamps to one epoch when the target is coarse") {
  const EpochSchedule at = schedule_cubic(2.0, 1.0, 2.0);
  CHECK(at.S == 1);
  CHECK(at.clamped);
  CHECK_FALSE(at.note.empty());
  const EpochSchedule above = schedule_cubic(50.0, 1.0, 2.0);
  CHECK(above.S == 1);
  CHECK(above.clamped);
  CHECK(above.epoch_lengths.size() == 1);
  CHECK_THROWS_AS(schedule_cubic(0.0, 1.0, 1.0), Error);
  CHECK_THROWS_AS(schedule_cubic(1e-3, -1.0, 1.0), Error);
}

TEST_CASE("general schedule ratios and monotone epoch lengths") {
  const EpochSchedule h = schedule_general(1e-6, 2.0, 3.0, 1, 1.0, 2.0, Regime::kHoelder);
  REQUIRE(h.S >= 3);
  for (int i = 0; i + 1 < h.S; ++i) {
    CHECK(h.sigmas[i + 1] / h.sigmas[i] == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(h.epoch_lengths[i + 1] <= h.epoch_lengths[i]);
  }
  // sigma_1 = eps / (C_A 4^0 D^1) for p + nu = 2.
  CHECK(h.sigmas[0] == doctest::Approx(1e-6 / (2.0 * 2.0)).epsilon(1e-13));
  // N_1 = ceil(4 (2^0 * 2 * C_A * L / sigma_1)^{1/2}) + 1.
  CHECK(h.epoch_lengths[0] == static_cast<int>(std::ceil(4.0 * std::sqrt(2.0 * 2.0 * 3.0 / h.sigmas[0]))) + 1);

  const EpochSchedule l = schedule_general(1e-6, 1.0, 1.0, 2, 1.0, 1.0, Regime::kLipschitz);
  REQUIRE(l.S >= 3);
  for (int i = 0; i + 1 < l.S; ++i) {
    CHECK(l.sigmas[i + 1] / l.sigmas[i] == doctest::Approx(std::pow(2.0, 3.5)).epsilon(1e-13));
    CHECK(l.epoch_lengths[i + 1] <= l.epoch_lengths[i]);
  }
  // N_s proportional to sigma_s^{-2/7}: successive unrounded lengths halve.
  for (int i = 0; i < l.S; ++i) {
    const double raw = 4.0 * std::pow(3.0 / l.sigmas[i], 2.0 / 7.0);
    CHECK(l.epoch_lengths[i] == std::max(1, static_cast<int>(std::ceil(raw))));
  }

  const EpochSchedule h2 = schedule_general(1e-5, 1.0, 5.0, 2, 1.0, 3.0, Regime::kHoelder);
  for (int i = 0; i + 1 < h2.S; ++i) {
    CHECK(h2.sigmas[i + 1] / h2.sigmas[i] == doctest::Approx(4.0).epsilon(1e-13));
    CHECK(h2.epoch_lengths[i + 1] <= h2.epoch_lengths[i]);
  }
  // The last weight is the first to reach the smoothness scale L.
  const double scale = 3.0 * 4.0 * 1.0;
  CHECK(h2.sigmas.back() * scale / 1e-5 >= 5.0 * scale / 4.0 * (1.0 - 1e-12));

  CHECK_THROWS_AS(schedule_general(1e-3, 1.0, 1.0, 1, 0.5, 1.0, Regime::kHoelder), Error);
  CHECK_THROWS_AS(schedule_general(1e-3, 1.0, 1.0, 0, 1.0, 1.0, Regime::kHoelder), Error);
  CHECK_THROWS_AS(schedule_general(1e-3, 1.0, 1.0, 2, 1.5, 1.0, Regime::kLipschitz), Error);
  CHECK_THROWS_AS(schedule_general(1e-3, 1.0, 1.0, 2, 1.0, 0.5, Regime::kLipschitz), Error);
}

TEST_CASE("one-epoch run reduces to a single regularized subroutine run") {
  auto prob = cubic_power(1);
  const Vec x0 = *prob->known().x_star + Vec::Constant(5, 1.0);
  EpochSchedule sch;
  sch.S = 1;
  sch.sigmas = {1e-8};
  sch.epoch_lengths = {300};
  ArOptions opt;
  opt.L = prob->known().L3->value;
  const ARResult r = ar_run(oracle(prob), x0, sch, opt);
  REQUIRE(r.epochs.size() == 1);
  CHECK(r.stack.size() == 1);
  const double bound = r.grad_fs_at_x_hat.norm() + 1e-8 * std::pow((r.x_hat - x0).norm(), 2);
  CHECK(r.grad_f_at_x_hat.norm() <= bound * (1.0 + 1e-12) + 1e-15);
  // The extra window doubles the iterations: x_hat comes from (N, 2N].
  CHECK(r.trace.rows().size() == 600);
  CHECK(r.grad_f_at_x_hat.norm() < 1e-2);
}

TEST_CASE("cubic accumulative regularization meets eps within the order-2 call ceiling") {
  for (std::uint64_t seed : {1u, 2u}) {
    auto prob = cubic_power(seed);
    const double L3 = prob->known().L3->value;
    const Vec x0 = *prob->known().x_star + Vec::Constant(5, 1.0);
    const double D = dist_to_opt(*prob, x0);
    for (double eps : {1e-2, 1e-3}) {
      const EpochSchedule sch = schedule_cubic(eps, D, L3);
      ArOptions opt;
      opt.L = L3;
      auto base = oracle(prob);
      const ARResult r = ar_run(base, x0, sch, opt);
      const double ceiling = std::ceil(128.0 * std::cbrt(L3) * std::pow(D, 2.0 / 3.0) / std::cbrt(eps) + 128.0 * sch.S);
      CHECK(r.grad_f_at_x_hat.norm() <= eps);
      CHECK(static_cast<double>(r.total_calls[2]) <= ceiling);
      CHECK(r.total_calls == base->counter().all());

      // Base gradient at x_hat: fresh evaluation, recovery from f_S, and the decomposition bound.
      const Vec direct = prob->eval(r.x_hat, 1).g;
      CHECK((r.grad_f_at_x_hat - direct).norm() == 0.0);
      const Vec recovered = recover_subgradient(r.stack, r.grad_fs_at_x_hat, r.x_hat);
      CHECK((recovered - direct).norm() <= 1e-12 * std::max(1.0, direct.norm()));
      CHECK(direct.norm() <= (r.grad_fs_at_x_hat.norm() + correction_norm_bound(r.stack, r.x_hat)) * (1 + 1e-12));

      // Trace rows carry monotone call columns and the epoch's sigma.
      const auto& rows = r.trace.rows();
      for (size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i].calls2 >= rows[i - 1].calls2);
        CHECK(rows[i].epoch >= rows[i - 1].epoch);
      }
      for (const auto& e : r.epochs) CHECK(e.sigma == sch.sigmas[e.s - 1]);
    }
  }
}

TEST_CASE("epoch solutions move monotonically and epochs contract by 1/4") {
  // Reference minimizers of each f_s come from 50x longer runs with a tight
  // cubic tolerance, polished until ||grad f_s|| is tiny.
  auto prob = cubic_power(3);
  const double L3 = prob->known().L3->value;
  const Vec x0 = *prob->known().x_star + Vec::Constant(5, 0.5);
  const double D = dist_to_opt(*prob, x0);
  const EpochSchedule sch = schedule_cubic(1e-3, D, L3);
  ArOptions opt;
  opt.L = L3;
  auto base = oracle(prob);
  const ARResult r = ar_run(base, x0, sch, opt);

  std::vector<Vec> x_star{*prob->known().x_star};
  for (int s = 1; s <= sch.S; ++s) {
    auto comp = compose(base, prefix(r.stack, s));
    RunOptions ro;
    ro.cubic_tol = 1e-11;
    const auto prm = AcnmParams::from_lipschitz(L3 + 4.0 * sch.sigmas[s - 1]);
    Vec z = acnm_run(*comp, r.epochs[s - 1].x_start, prm, 50 * sch.epoch_lengths[s - 1], ro).x_best;
    for (int polish = 0; polish < 20; ++polish) {
      const Evaluation e = comp->audit(z, 2);
      if (e.g.norm() <= 1e-11) break;
      z -= e.H.matrix().ldlt().solve(e.g);
    }
    CHECK(comp->audit(z, 1).g.norm() <= 1e-10);
    x_star.push_back(z);
  }
  // Distances below this are beyond the accuracy of the reference minimizers.
  const double resolution = 1e-8;
  int resolved = 0;
  for (int s = 1; s <= sch.S; ++s) {
    const Vec& start = r.epochs[s - 1].x_start;
    const Vec& out = r.epochs[s - 1].x_out;
    const double prev = (start - x_star[s - 1]).norm();
    if (prev > resolution) ++resolved;
    if (s >= 2) CHECK((start - x_star[s]).norm() <= prev + resolution);
    CHECK((out - x_star[s]).norm() <= 0.25 * prev + resolution);
  }
  CHECK(resolved >= 2);
}

TEST_CASE("accelerated gradient inside accumulative regularization: eps met, calls grow like eps^-1/2") {
  auto prob = quadratic(4, 1e6);
  const Vec x0 = Vec::Zero(10);
  const double D = dist_to_opt(*prob, x0);
  const double L = prob->known().L2->value;
  std::vector<double> inv_eps, calls;
  for (double eps : {1e-2, 1e-3, 1e-4, 1e-5}) {
    const EpochSchedule sch = schedule_general(eps, D, L, 1, 1.0, 2.0, Regime::kHoelder);
    ArOptions opt;
    opt.sub = SubroutineKind::kAgd;
    opt.p = 1;
    opt.L = L;
    const ARResult r = ar_run(oracle(prob), x0, sch, opt);
    CHECK(r.grad_f_at_x_hat.norm() <= eps);
    inv_eps.push_back(1.0 / eps);
    calls.push_back(static_cast<double>(r.total_calls[1]));
  }
  const double slope = loglog_slope(inv_eps, calls);
  CHECK(slope >= 0.40);
  CHECK(slope <= 0.625);
}

TEST_CASE("accumulative regularization rejects bad inputs and reports aborted epochs") {
  auto prob = cubic_power(1);
  const Vec x0 = Vec::Zero(5);
  EpochSchedule bad;
  bad.S = 2;
  bad.sigmas = {1.0};
  bad.epoch_lengths = {1, 1};
  CHECK_THROWS_AS(ar_run(oracle(prob), x0, bad, {}), Error);

  const EpochSchedule sch = schedule_cubic(1e-2, 1.0, 1.0);
  ArOptions nu;
  nu.nu = 0.5;
  CHECK_THROWS_AS(ar_run(oracle(prob), x0, sch, nu), Error);
  ArOptions mismatch;
  mismatch.sub = SubroutineKind::kAgd;
  mismatch.p = 2;
  CHECK_THROWS_AS(ar_run(oracle(prob), x0, sch, mismatch), Error);

  // Step 1/L with L a million times too small diverges in the first epoch.
  auto q = quadratic(1, 10.0, 4);
  ArOptions agd;
  agd.sub = SubroutineKind::kAgd;
  agd.p = 1;
  agd.L = q->known().L2->value * 1e-6;
  EpochSchedule one;
  one.S = 1;
  one.sigmas = {1e-12};
  one.epoch_lengths = {200};
  try {
    ar_run(oracle(q), Vec::Constant(4, 1.0), one, agd);
    FAIL("expected an aborted run");
  } catch (const AbortedRun& e) {
    CHECK(e.code() == ErrorCode::kDivergence);
    CHECK(e.failed_epoch() == 1);
  }
}

TEST_CASE("parameter-free regularization satisfies the sigma_1 output bound") {
  auto prob = power_norm(4, 3.0);
  Vec x0 = prob->known().x_star.value();
  x0(1) += 1.0;
  const double dist = 1.0;
  const double L = prob->known().L3->value;
  for (double sigma1 : {1e-6, 1e-5, 1e-4, 1e-3, 1e-2}) {
    const ARResult r = ar_parameter_free(oracle(prob), x0, sigma1, L);
    CHECK(r.grad_f_at_x_hat.norm() <= 3.0 * sigma1 * std::pow(9.0 * dist, 2));
    CHECK(r.warnings.empty());
  }

  const double eps = 1e-4;
  const ARResult r = ar_parameter_free(oracle(prob), x0, eps / (3.0 * 81.0), L);
  CHECK(r.grad_f_at_x_hat.norm() <= eps);
  for (size_t i = 1; i < r.epochs.size(); ++i)
    CHECK(r.epochs[i].sigma / r.epochs[i - 1].sigma == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("parameter-free regularization: huge sigma_1 ends after one epoch") {
  auto prob = power_norm(3, 3.0);
  Vec x0 = prob->known().x_star.value();
  x0(2) -= 2.0;
  const double sigma1 = 1e3;
  const ARResult r = ar_parameter_free(oracle(prob), x0, sigma1, 1.0);
  CHECK(r.epochs.size() == 1);
  CHECK(r.grad_f_at_x_hat.norm() <= 3.0 * sigma1 * std::pow(9.0 * 2.0, 2));
  CHECK(r.warnings.size() == 1);
}

TEST_CASE("parameter-free regularization is insensitive to the initial estimate") {
  auto prob = power_norm(4, 3.0);
  Vec x0 = prob->known().x_star.value();
  x0(1) += 1.0;
  const double L = prob->known().L3->value;
  const double sigma1 = 1e-4 / 243.0;
  std::vector<double> calls;
  for (double f : {1.0 / 1024.0, 1.0, 1024.0}) {
    const ARResult r = ar_parameter_free(oracle(prob), x0, sigma1, f * L);
    CHECK(r.grad_f_at_x_hat.norm() <= 1e-4);
    calls.push_back(static_cast<double>(r.total_calls[1]));
  }
  const double hi = std::max({calls[0], calls[1], calls[2]});
  const double lo = std::min({calls[0], calls[1], calls[2]});
  CHECK(hi <= 4.0 * lo);
}

TEST_CASE("parameter-free first-order regularization on a quadratic") {
  auto prob = quadratic(2, 100.0, 6);
  const Vec x0 = Vec::Zero(6);
  const double dist = dist_to_opt(*prob, x0);
  ParamFreeOptions opt;
  opt.p = 1;
  for (double sigma1 : {1e-5, 1e-3}) {
    const ARResult r = ar_parameter_free(oracle(prob), x0, sigma1, 1.0, opt);
    CHECK(r.grad_f_at_x_hat.norm() <= 3.0 * sigma1 * 9.0 * dist);
    for (size_t i = 1; i < r.epochs.size(); ++i)
      CHECK(r.epochs[i].sigma / r.epochs[i - 1].sigma == doctest::Approx(2.0).epsilon(1e-14));
  }
}

TEST_CASE("parameter-free regularization stops at the epoch cap") {
  auto prob = power_norm(3, 3.0);
  Vec x0 = prob->known().x_star.value();
  x0(0) += 1.0;
  ParamFreeOptions opt;
  opt.max_epochs = 1;
  try {
    ar_parameter_free(oracle(prob), x0, 1e-9, 1.0, opt);
    FAIL("expected the epoch cap");
  } catch (const AbortedRun& e) {
    CHECK(e.code() == ErrorCode::kEpochCap);
    CHECK_FALSE(e.partial_trace().empty());
  }
  CHECK_THROWS_AS(ar_parameter_free(oracle(prob), x0, 0.0, 1.0), Error);
  ParamFreeOptions p3;
  p3.p = 3;
  CHECK_THROWS_AS(ar_parameter_free(oracle(prob), x0, 1e-3, 1.0, p3), Error);
}

TEST_CASE("guess-and-check: D0 underestimates the distance and rounds are bounded") {
  auto check = [](std::shared_ptr<const Problem> prob, const Vec& x0, int p, double eps) {
    const double dist = dist_to_opt(*prob, x0);
    ParamFreeOptions opt;
    opt.p = p;
    const GuessCheckResult r = guess_and_check_D(oracle(prob), x0, eps, 1.0, opt);
    CHECK(r.D0 > 0.0);
    CHECK(r.D0 <= dist);
    CHECK(r.rounds <= static_cast<int>(std::ceil(std::log(dist / r.D0) / std::log(4.0))) + 1);
    CHECK(r.ar.grad_f_at_x_hat.norm() <= eps);
    CHECK(r.guesses.size() == static_cast<size_t>(r.rounds));
    CHECK(r.guesses[0] == doctest::Approx(4.0 * r.D0).epsilon(1e-14));
  };
  for (double d : {0.1, 1.0, 10.0}) {
    Vec x0 = Vec::Zero(4);
    x0(0) = 0.3 + d;
    check(power_norm(4, 3.0), x0, 2, 1e-4);
  }
  for (std::uint64_t seed : {1u, 2u}) {
    auto prob = cubic_power(seed);
    check(prob, *prob->known().x_star + Vec::Constant(5, 1.0), 2, 1e-4);
    check(quadratic(seed, 1e3, 5), Vec::Zero(5), 1, 1e-5);
  }
}

TEST_CASE("guess-and-check with eps above the initial gradient needs one round") {
  auto prob = cubic_power(1);
  const Vec x0 = *prob->known().x_star + Vec::Constant(5, 1.0);
  const double g0 = prob->eval(x0, 1).g.norm();
  const GuessCheckResult r = guess_and_check_D(oracle(prob), x0, 2.0 * g0, 1.0);
  CHECK(r.rounds == 1);
  CHECK(r.ar.grad_f_at_x_hat.norm() <= 2.0 * g0);
}
