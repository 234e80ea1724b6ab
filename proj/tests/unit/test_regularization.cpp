#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "argmin/problems.hpp"
#include "argmin/regularization.hpp"
#include "oracles.hpp"

using namespace argmin;
namespace tst = argmin::testing;

namespace {

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

std::shared_ptr<ProblemOracle> half_norm_squared(Eigen::Index n) {
  ProblemSpec s;
  s.A = Mat::Identity(n, n);
  s.b = Vec::Zero(n);
  return std::make_shared<ProblemOracle>(make_problem(s));
}

}  // namespace

TEST_CASE("prox term at its center") {
  for (double k : {2.0, 2.5, 3.0, 4.0}) {
    const ProxEval e = prox_eval(PowerProxTerm{vec2(1, 1), 3.0, k}, vec2(1, 1), 2);
    CHECK(e.value == 0.0);
    CHECK(e.gradient.norm() == 0.0);
    CHECK(e.hessian.matrix().norm() == (k == 2.0 ? doctest::Approx(3.0 * std::sqrt(2.0)) : doctest::Approx(0.0)));
  }
}

TEST_CASE("cubic prox term at offset (0, 2)") {
  const ProxEval e = prox_eval(PowerProxTerm{Vec::Zero(2), 1.0, 3.0}, vec2(0, 2), 2);
  CHECK(e.value == doctest::Approx(8.0 / 3.0));
  CHECK((e.gradient - vec2(0, 4)).norm() < 1e-14);
  CHECK((e.hessian.matrix() - Mat(Vec(vec2(2, 4)).asDiagonal())).norm() < 1e-14);
  const auto f = [](const Vec& x) { return prox_eval(PowerProxTerm{Vec::Zero(2), 1.0, 3.0}, x, 0).value; };
  CHECK(tst::rel_err(e.gradient, tst::fd_gradient(f, vec2(0, 2))) < 1e-7);
}

TEST_CASE("quadratic prox term") {
  const ProxEval e = prox_eval(PowerProxTerm{Vec::Zero(2), 5.0, 2.0}, vec2(1, 0), 2);
  CHECK(e.value == doctest::Approx(2.5));
  CHECK((e.gradient - vec2(5, 0)).norm() < 1e-14);
  CHECK((e.hessian.matrix() - 5.0 * Mat::Identity(2, 2)).norm() < 1e-14);
}

TEST_CASE("compose with an empty stack is the base objective") {
  auto base = half_norm_squared(3);
  auto fs = compose(base, RegularizerStack{});
  const Vec x = Vec::LinSpaced(3, -1.0, 2.0);
  const Evaluation a = fs->audit(x, 2), b = base->audit(x, 2);
  CHECK(a.f == b.f);
  CHECK(a.g == b.g);
  CHECK(a.H.matrix() == b.H.matrix());
}

TEST_CASE("compose adds the closed forms and counts once on the base counter") {
  auto base = half_norm_squared(2);
  RegularizerStack st;
  st.push(Vec::Zero(2), 1.0, 3.0);
  auto fs = compose(base, st);
  const Evaluation e = fs->evaluate(vec2(2, 0), 2);
  CHECK(e.f == doctest::Approx(2.0 + 8.0 / 3.0));
  CHECK((e.g - vec2(6, 0)).norm() < 1e-14);
  CHECK((e.base_g - vec2(2, 0)).norm() < 1e-15);
  CHECK(base->counter().calls(2) == 1);
  CHECK(base->counter().calls(0) == 1);
  CHECK((recover_subgradient(st, e.g, vec2(2, 0)) - vec2(2, 0)).norm() < 1e-15);
}

TEST_CASE("two stacked terms: gradient equals the sum of analytic gradients and matches differences") {
  auto base = half_norm_squared(2);
  RegularizerStack st;
  st.push(vec2(1, -1), 0.5, 3.0);
  st.push(vec2(-2, 0.5), 1.5, 3.0);
  CHECK(st.sigma() == doctest::Approx(2.0));
  auto fs = compose(base, st);
  const Vec x = vec2(0.3, 0.7);
  const Evaluation e = fs->audit(x, 2);
  const Vec sum = x + prox_eval(st.terms()[0], x, 1).gradient + prox_eval(st.terms()[1], x, 1).gradient;
  CHECK((e.g - sum).norm() <= 1e-15 * sum.norm() * 4);
  const auto f = [&](const Vec& y) { return fs->audit(y, 0).f; };
  const auto g = [&](const Vec& y) { return fs->audit(y, 1).g; };
  CHECK(tst::rel_err(e.g, tst::fd_gradient(f, x)) < 1e-7);
  CHECK(tst::rel_err(e.H.matrix(), tst::fd_hessian(g, x)) < 1e-7);
}

TEST_CASE("recover_subgradient corner cases") {
  const Vec g = vec2(1.5, -2.0);
  CHECK(recover_subgradient(RegularizerStack{}, g, vec2(3, 3)) == g);
  RegularizerStack st;
  st.push(vec2(3, 3), 2.0, 3.0);
  CHECK(recover_subgradient(st, g, vec2(3, 3)) == g);
}

TEST_CASE("correction bound") {
  CHECK(correction_norm_bound(RegularizerStack{}, vec2(1, 1)) == 0.0);
  RegularizerStack st;
  st.push(Vec::Zero(2), 2.0, 3.0);
  CHECK(correction_norm_bound(st, vec2(3, 0)) == doctest::Approx(18.0));
  st.push(vec2(1, 1), 0.5, 3.0);
  std::mt19937_64 rng(4);
  for (int i = 0; i < 200; ++i) {
    const Vec x = tst::random_vec(rng, 2, 2.0);
    CHECK(st.eval(x, 1).gradient.norm() <= correction_norm_bound(st, x) * (1 + 1e-14));
  }
}

TEST_CASE("stack rejects non-increasing weights and powers below 2") {
  RegularizerStack st;
  st.push(Vec::Zero(2), 0.0, 3.0);
  CHECK_THROWS(st.push(Vec::Zero(2), 0.0, 3.0));
  CHECK_THROWS(st.push(Vec::Zero(2), 1.0, 1.5));
}

TEST_CASE("recover inverts compose for random stacks") {
  GeneratorParams gp;
  gp.family = ProblemFamily::kCubicPower;
  gp.n = 4;
  gp.m = 6;
  auto base = std::make_shared<ProblemOracle>(make_problem(generate_spec(gp, 3)));
  std::mt19937_64 rng(6);
  double worst = 0.0;
  for (int trial = 0; trial < 300; ++trial) {
    RegularizerStack st;
    const int terms = 1 + trial % 5;
    for (int i = 0; i < terms; ++i) st.push(tst::random_vec(rng, 4), 0.1 * (i + 1), 2.0 + 0.5 * (trial % 5));
    const Vec x = tst::random_vec(rng, 4);
    const Evaluation e = compose(base, st)->audit(x, 1);
    const Vec gf = base->audit(x, 1).g;
    worst = std::max(worst, (recover_subgradient(st, e.g, x) - gf).norm() / std::max(1.0, gf.norm()));
  }
  CHECK(worst <= 1e-13);
}

TEST_CASE("power prox uniform convexity with constant (1/2)^(kappa-2)") {
  std::mt19937_64 rng(21);
  for (double k : {2.0, 2.5, 3.0, 4.0}) {
    const PowerProxTerm t{Vec::Zero(3), 1.0, k};
    for (int i = 0; i < 1000; ++i) {
      const Vec x = tst::random_vec(rng, 3), y = tst::random_vec(rng, 3);
      const ProxEval ey = prox_eval(t, y, 1);
      const double gap = prox_eval(t, x, 0).value - ey.value - ey.gradient.dot(x - y);
      REQUIRE(gap >= std::pow(0.5, k - 2.0) / k * std::pow((x - y).norm(), k) - 1e-12);
    }
  }
}

TEST_CASE("cubic prox Hessian is 4-Lipschitz") {
  std::mt19937_64 rng(22);
  const PowerProxTerm t{Vec::Zero(3), 1.0, 3.0};
  for (int i = 0; i < 1000; ++i) {
    const Vec x = tst::random_vec(rng, 3), y = tst::random_vec(rng, 3);
    const double lhs = spectral_norm(SymMat(prox_eval(t, x, 2).hessian.matrix() - prox_eval(t, y, 2).hessian.matrix()));
    REQUIRE(lhs <= 4.0 * (x - y).norm() + 1e-14);
  }
}

TEST_CASE("finite differences of the prox term for several powers") {
  std::mt19937_64 rng(23);
  for (double k : {2.0, 2.5, 3.0, 4.0}) {
    const PowerProxTerm t{tst::random_vec(rng, 3), 1.7, k};
    const auto f = [&](const Vec& x) { return prox_eval(t, x, 0).value; };
    const auto g = [&](const Vec& x) { return prox_eval(t, x, 1).gradient; };
    for (int i = 0; i < 100; ++i) {
      const Vec x = tst::random_vec(rng, 3);
      const ProxEval e = prox_eval(t, x, 2);
      REQUIRE(tst::rel_err(e.gradient, tst::fd_gradient(f, x)) <= 1e-5);
      REQUIRE(tst::rel_err(e.hessian.matrix(), tst::fd_hessian(g, x)) <= 1e-5);
    }
  }
}
