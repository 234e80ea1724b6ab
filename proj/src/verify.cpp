#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include <Eigen/Cholesky>

#include "argmin/cubic.hpp"
#include "argmin/error.hpp"
#include "argmin/harness.hpp"
#include "argmin/uniform.hpp"

namespace argmin::harness {

namespace {

using Rng = std::mt19937_64;

Vec gaussian(Rng& rng, Eigen::Index n, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = nd(rng);
  return v;
}

Mat gaussian_sym(Rng& rng, Eigen::Index n) {
  Mat a(n, n);
  std::normal_distribution<double> nd;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = nd(rng);
  return (a + a.transpose()) / 2.0;
}

template <class F>
Vec fd_gradient(const F& f, const Vec& x, double h = 1e-6) {
  Vec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec a = x, b = x;
    a(i) += h;
    b(i) -= h;
    g(i) = (f(a) - f(b)) / (2.0 * h);
  }
  return g;
}

template <class G>
Mat fd_jacobian(const G& grad, const Vec& x, double h = 1e-6) {
  Mat J(x.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec a = x, b = x;
    a(i) += h;
    b(i) -= h;
    J.col(i) = (grad(a) - grad(b)) / (2.0 * h);
  }
  return (J + J.transpose()) / 2.0;
}

// Step length of the diagonal cubic model by bisection on
// sum_i g_i^2 / (l_i + M r / 2)^2 = r^2, right of the boundary.
double bisect_radius(const Vec& lams, const Vec& g, double M) {
  const double lo0 = std::max(0.0, -2.0 * lams.minCoeff() / M);
  auto phi = [&](double r) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < lams.size(); ++i) {
      const double d = lams(i) + M * r / 2.0;
      s += g(i) * g(i) / (d * d);
    }
    return s - r * r;
  };
  double lo = lo0, hi = std::max(1.0, lo0) * 2.0;
  if (lo0 > 0.0 && !(phi(lo0 * (1.0 + 1e-15) + 1e-300) > 0.0)) return lo0;
  while (phi(hi) > 0.0) hi *= 2.0;
  for (int it = 0; it < 400 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (phi(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

class Suite {
 public:
  explicit Suite(const VerifyOptions& opt) : opt_(opt), rng_(opt.seed) {}

  bool enabled(const std::string& module) const {
    return opt_.filter.empty() || module.find(opt_.filter) != std::string::npos;
  }

  void at_most(const std::string& module, const std::string& name, double measured, double limit,
               std::string detail = {}) {
    out_.push_back({module, name, measured <= limit, measured, limit, std::move(detail)});
  }
  void at_least(const std::string& module, const std::string& name, double measured, double limit,
                std::string detail = {}) {
    out_.push_back({module, name, measured >= limit, measured, limit, std::move(detail)});
  }
  // Runs one block; an exception becomes a failed check instead of ending the suite.
  template <class F>
  void block(const std::string& module, const std::string& name, F&& f) {
    try {
      f();
    } catch (const std::exception& e) {
      out_.push_back({module, name, false, std::nan(""), 0.0, e.what()});
    }
  }

  ProxEval prox(const PowerProxTerm& t, const Vec& x, int order) const {
    return opt_.prox_eval ? opt_.prox_eval(t, x, order) : prox_eval(t, x, order);
  }

  Rng& rng() { return rng_; }
  std::vector<CheckResult> take() { return std::move(out_); }

 private:
  VerifyOptions opt_;
  Rng rng_;
  std::vector<CheckResult> out_;
};

std::shared_ptr<const Problem> generated(ProblemFamily family, std::uint64_t seed, double q = 3.0, double reg = 0.0) {
  GeneratorParams gp;
  gp.family = family;
  gp.n = 5;
  gp.m = family == ProblemFamily::kLogistic ? 20 : 8;
  gp.q = q;
  gp.reg = reg;
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

void check_linalg(Suite& s) {
  const std::string mod = "core_linalg";
  s.block(mod, "sym_eig reconstruction", [&] {
    double worst = 0.0;
    int nonfinite = 0;
    std::uniform_int_distribution<int> dim(1, 16);
    for (int t = 0; t < 1000; ++t) {
      const SymMat h(gaussian_sym(s.rng(), dim(s.rng())));
      const EigDecomp e = sym_eig(h);
      worst = std::max(worst, (e.reconstruct() - h.matrix()).norm() / std::max(1e-300, h.matrix().norm()));
      const Vec g = gaussian(s.rng(), h.dim());
      const Vec x = solve_shifted(e, std::abs(e.lambda_min()) + 1.0, g);
      if (!e.eigvals.allFinite() || !e.eigvecs.allFinite() || !x.allFinite()) ++nonfinite;
    }
    s.at_most(mod, "sym_eig reconstruction (1000 matrices, relative Frobenius error)", worst, 1e-10);
    s.at_most(mod, "finite outputs of sym_eig and solve_shifted (count of non-finite)", nonfinite, 0);
  });
}

void check_cubic(Suite& s) {
  const std::string mod = "cubic_solver";
  s.block(mod, "cubic step properties", [&] {
    std::uniform_int_distribution<int> dim(1, 8);
    std::uniform_real_distribution<double> logM(-2.0, 2.0);
    double growth = -1.0, model = -1.0, agree = 0.0;
    for (int t = 0; t < 200; ++t) {
      const Eigen::Index n = dim(s.rng());
      const CubicModel m1{gaussian(s.rng(), n), SymMat(gaussian_sym(s.rng(), n)), std::pow(10.0, logM(s.rng()))};
      CubicModel m2 = m1;
      m2.M *= 2.0;
      const CubicStepResult a = cubic_step(m1, 1e-12), b = cubic_step(m2, 1e-12);
      growth = std::max(growth, (b.r - a.r) / std::max(1.0, a.r));
      model = std::max(model, std::max(m1.value(a.h), m2.value(b.h)) / std::max(1.0, m1.g.squaredNorm()));
    }
    for (int t = 0; t < 200; ++t) {
      const Eigen::Index n = dim(s.rng());
      Vec lams = gaussian(s.rng(), n), g = gaussian(s.rng(), n);
      const double M = std::pow(10.0, logM(s.rng()));
      // Every fourth instance is a hard case: no gradient on the most negative direction.
      if (t % 4 == 0) {
        Eigen::Index i;
        lams.minCoeff(&i);
        lams(i) = -std::abs(lams(i)) - 0.5;
        g(i) = 0.0;
      }
      const CubicStepResult r = cubic_step(CubicModel{g, SymMat::diagonal(lams), M}, 1e-12);
      agree = std::max(agree, std::abs(r.r - bisect_radius(lams, g, M)));
    }
    s.at_most(mod, "step length non-increasing when M doubles (relative growth)", growth, 1e-10);
    s.at_most(mod, "model value at the step is <= 0 (scaled by max(1,|g|^2))", model, 0.0);
    s.at_most(mod, "diagonal H: |r - bisection r| incl. hard cases", agree, 1e-8);
  });
}

void check_problems(Suite& s) {
  const std::string mod = "problems";
  struct Case {
    const char* name;
    std::shared_ptr<const Problem> prob;
  };
  std::vector<Case> cases;
  s.block(mod, "problem construction", [&] {
    cases = {{"quadratic", generated(ProblemFamily::kQuadratic, 1)},
             {"cubic_power", generated(ProblemFamily::kCubicPower, 1)},
             {"power_norm(3)", generated(ProblemFamily::kPowerNorm, 1, 3.0)},
             {"power_norm(4)", generated(ProblemFamily::kPowerNorm, 1, 4.0)},
             {"logistic", generated(ProblemFamily::kLogistic, 1, 3.0, 0.1)},
             {"logsumexp", generated(ProblemFamily::kLogSumExp, 1)}};
  });
  for (const Case& c : cases) {
    s.block(mod, std::string(c.name) + " derivatives", [&] {
      const Problem& p = *c.prob;
      double g_err = 0.0, h_err = 0.0, mono = HUGE_VAL;
      for (int t = 0; t < 100; ++t) {
        const Vec x = gaussian(s.rng(), p.dim());
        const Evaluation e = p.eval(x, 2);
        const Vec fg = fd_gradient([&](const Vec& z) { return p.eval(z, 0).f; }, x);
        const Mat fh = fd_jacobian([&](const Vec& z) { return Vec(p.eval(z, 1).g); }, x);
        g_err = std::max(g_err, (e.g - fg).norm() / std::max(1.0, fg.norm()));
        h_err = std::max(h_err, (e.H.matrix() - fh).norm() / std::max(1.0, fh.norm()));
      }
      for (int t = 0; t < 1000; ++t) {
        const Vec x = gaussian(s.rng(), p.dim()), y = gaussian(s.rng(), p.dim());
        mono = std::min(mono, (p.eval(x, 1).g - p.eval(y, 1).g).dot(x - y));
      }
      s.at_most(mod, std::string(c.name) + ": gradient vs finite differences (relative)", g_err, 1e-5);
      s.at_most(mod, std::string(c.name) + ": Hessian vs finite differences (relative)", h_err, 1e-5);
      s.at_least(mod, std::string(c.name) + ": convexity, min <g(x)-g(y), x-y>", mono, -1e-10);
    });
  }
  s.block(mod, "power_norm uniform convexity", [&] {
    double worst = HUGE_VAL;
    for (double q : {2.0, 3.0, 4.0}) {
      auto p = power_norm(5, q);
      const double sigma = std::pow(2.0, -(q - 2.0));
      for (int t = 0; t < 1000; ++t) {
        const Vec x = gaussian(s.rng(), 5), y = gaussian(s.rng(), 5);
        const Evaluation ex = p->eval(x, 0), ey = p->eval(y, 1);
        const double gap = ex.f - ey.f - ey.g.dot(x - y) - sigma / q * std::pow((x - y).norm(), q);
        worst = std::min(worst, gap / std::max(1.0, std::abs(ex.f)));
      }
    }
    s.at_least(mod, "power_norm(q), q in {2,3,4}: uniform convexity with sigma = 2^-(q-2)", worst, -1e-10);
  });
  s.block(mod, "cubic_power Hessian Lipschitz", [&] {
    auto p = generated(ProblemFamily::kCubicPower, 2);
    const double L3 = p->known().L3->value;
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
      const Vec x = gaussian(s.rng(), 5), y = gaussian(s.rng(), 5);
      const double d = spectral_norm(SymMat(p->eval(x, 2).H.matrix() - p->eval(y, 2).H.matrix()));
      worst = std::max(worst, d / (L3 * (x - y).norm()));
    }
    s.at_most(mod, "cubic_power: ||H(x)-H(y)|| / (L3 ||x-y||)", worst, 1.0 + 1e-10);
  });
}

void check_regularization(Suite& s) {
  const std::string mod = "regularization";
  s.block(mod, "prox term derivatives", [&] {
    double g_err = 0.0, h_err = 0.0, uc = HUGE_VAL;
    for (double kappa : {2.0, 2.5, 3.0, 4.0}) {
      const PowerProxTerm term{gaussian(s.rng(), 4), 1.0, kappa};
      auto value = [&](const Vec& z) { return s.prox(term, z, 0).value; };
      for (int t = 0; t < 100; ++t) {
        const Vec x = gaussian(s.rng(), 4);
        const ProxEval e = s.prox(term, x, 2);
        const Vec fg = fd_gradient(value, x);
        const Mat fh = fd_jacobian([&](const Vec& z) { return Vec(s.prox(term, z, 1).gradient); }, x);
        g_err = std::max(g_err, (e.gradient - fg).norm() / std::max(1.0, fg.norm()));
        h_err = std::max(h_err, (e.hessian.matrix() - fh).norm() / std::max(1.0, fh.norm()));
      }
      for (int t = 0; t < 1000; ++t) {
        const Vec x = gaussian(s.rng(), 4), y = gaussian(s.rng(), 4);
        const ProxEval ex = s.prox(term, x, 0), ey = s.prox(term, y, 1);
        const double gap = ex.value - ey.value - ey.gradient.dot(x - y) -
                           std::pow(0.5, kappa - 2.0) / kappa * std::pow((x - y).norm(), kappa);
        uc = std::min(uc, gap / std::max(1.0, ex.value));
      }
    }
    s.at_most(mod, "prox gradient vs finite differences, kappa in {2,2.5,3,4}", g_err, 1e-5);
    s.at_most(mod, "prox Hessian vs finite differences, kappa in {2,2.5,3,4}", h_err, 1e-5);
    s.at_least(mod, "prox uniform convexity with constant (1/2)^(kappa-2)", uc, -1e-10);
  });
  s.block(mod, "cubic prox Hessian smoothness", [&] {
    const PowerProxTerm term{gaussian(s.rng(), 4), 1.0, 3.0};
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
      const Vec x = gaussian(s.rng(), 4), y = gaussian(s.rng(), 4);
      const Mat d = s.prox(term, x, 2).hessian.matrix() - s.prox(term, y, 2).hessian.matrix();
      worst = std::max(worst, spectral_norm(SymMat(d)) / (x - y).norm());
    }
    s.at_most(mod, "kappa = 3: ||H(x)-H(y)|| / ||x-y||", worst, 4.0 * (1.0 + 1e-10));
  });
  s.block(mod, "recover_subgradient", [&] {
    auto base = oracle(generated(ProblemFamily::kLogistic, 3, 3.0, 0.1));
    std::uniform_int_distribution<int> depth(0, 6);
    double worst = 0.0;
    for (int t = 0; t < 200; ++t) {
      RegularizerStack stack;
      double w = 0.0;
      const int S = depth(s.rng());
      for (int i = 0; i < S; ++i) {
        w = std::abs(gaussian(s.rng(), 1)(0)) + 1e-3;
        stack.push(gaussian(s.rng(), 5), w, i % 2 ? 3.0 : 2.0);
      }
      auto comp = compose(base, stack);
      const Vec x = gaussian(s.rng(), 5);
      const Vec direct = base->audit(x, 1).g;
      const Vec rec = recover_subgradient(stack, comp->audit(x, 1).g, x);
      worst = std::max(worst, (rec - direct).norm() / std::max(1.0, direct.norm()));
    }
    s.at_most(mod, "recover_subgradient inverts compose (relative)", worst, 1e-13);
  });
  s.block(mod, "counter discipline", [&] {
    auto base = oracle(generated(ProblemFamily::kCubicPower, 1));
    RegularizerStack stack;
    stack.push(Vec::Zero(5), 1.0, 3.0);
    stack.push(Vec::Ones(5), 0.5, 3.0);
    auto comp = compose(base, stack);
    const Vec x = Vec::Constant(5, 0.3);
    for (int order = 0; order <= 2; ++order) comp->evaluate(x, order);
    base->evaluate(x, 1);
    const std::array<std::int64_t, 3> expected{4, 3, 1};
    double off = 0.0;
    for (int i = 0; i < 3; ++i) off += std::abs(static_cast<double>(base->counter().calls(i) - expected[i]));
    off += std::abs(static_cast<double>(comp->counter().calls(0) - base->counter().calls(0)));
    s.at_most(mod, "composed calls counted once on the base counter (miscount)", off, 0.0);
  });
}

void check_subroutines(Suite& s) {
  const std::string mod = "subroutines";
  s.block(mod, "accelerated cubic Newton", [&] {
    double r1 = -1e300, r2 = -1e300, bound = 0.0;
    int violations = 0;
    double slack = 0.0;
    for (std::uint64_t seed : {1u, 2u}) {
      auto prob = generated(ProblemFamily::kCubicPower, seed);
      const KnownConstants& kc = prob->known();
      const double L3 = kc.L3->value;
      const Vec x0 = *kc.x_star + Vec::Constant(5, 1.0);
      const double D = (x0 - *kc.x_star).norm();
      ProblemOracle o(prob);
      RunOptions ro;
      ro.keep_iterates = true;
      ro.check_relations = true;
      ro.seed = seed;
      const SubroutineResult r = acnm_run(o, x0, AcnmParams::from_lipschitz(L3), 200, ro);
      r1 = std::max(r1, r.relations.max_r1);
      r2 = std::max(r2, r.relations.max_r2);
      violations += r.relations.r1_violations + r.relations.r2_violations;
      slack = r.relations.slack;
      for (const IterateRecord& it : r.iterates) {
        const double k = it.k;
        const double lhs = it.f - *kc.f_star + std::pow(it.grad_norm, 1.5) / std::sqrt(3.0 * L3);
        bound = std::max(bound, lhs / (80.0 * L3 * D * D * D / (k * (k + 1.0) * (k + 2.0))));
      }
    }
    s.at_most(mod, "first estimating-function relation, max normalized residual", r1, slack);
    s.at_most(mod, "second estimating-function relation (20 points/iter), max residual", r2, slack);
    s.at_most(mod, "relation violations", violations, 0.0);
    s.at_most(mod, "composite bound / 80 L3 D^3 / (k(k+1)(k+2)), k <= 200", bound, 1.0 + 1e-6);
  });
  s.block(mod, "adaptive estimates", [&] {
    double worst = 0.0;
    auto prob = generated(ProblemFamily::kCubicPower, 1);
    const double L3 = prob->known().L3->value;
    for (double L0 : {L3 / 1000.0, L3, 100.0 * L3}) {
      ProblemOracle o(prob);
      RunOptions ro;
      ro.keep_iterates = true;
      const SubroutineResult r =
          adaptive_run(o, *prob->known().x_star + Vec::Constant(5, 1.0), L0, StopRule::fixed(40), 2, ro);
      for (const IterateRecord& it : r.iterates) worst = std::max(worst, it.L / (4.0 * std::max(2.0 * L3, L0)));
    }
    s.at_most(mod, "adaptive cubic: max L_k / (4 max{p L3, L0})", worst, 1.0);
  });
  s.block(mod, "strict decrease", [&] {
    double worst = -1e300;
    auto cp = generated(ProblemFamily::kCubicPower, 2);
    auto qd = generated(ProblemFamily::kQuadratic, 2);
    const Vec x0 = *cp->known().x_star + Vec::Constant(5, 1.0);
    auto rel = [](double f_out, double f0) { return (f_out - f0) / std::max(1.0, std::abs(f0)); };
    {
      ProblemOracle o(cp);
      const SubroutineResult r = acnm_run(o, x0, AcnmParams::from_lipschitz(cp->known().L3->value), 10);
      worst = std::max(worst, rel(cp->eval(r.x_out, 0).f, cp->eval(x0, 0).f));
    }
    {
      ProblemOracle o(cp);
      const SubroutineResult r = adaptive_run(o, x0, 1.0, StopRule::fixed(10), 2);
      worst = std::max(worst, rel(cp->eval(r.x_out, 0).f, cp->eval(x0, 0).f));
    }
    const Vec z0 = Vec::Constant(5, 1.0);
    {
      ProblemOracle o(qd);
      const SubroutineResult r = agd_run(o, z0, qd->known().L2->value, 10);
      worst = std::max(worst, rel(qd->eval(r.x_out, 0).f, qd->eval(z0, 0).f));
    }
    {
      ProblemOracle o(qd);
      const SubroutineResult r = adaptive_run(o, z0, 1.0, StopRule::fixed(10), 1);
      worst = std::max(worst, rel(qd->eval(r.x_out, 0).f, qd->eval(z0, 0).f));
    }
    s.at_most(mod, "all subroutines decrease f: max (f(x_N) - f(x_0)) relative", worst, -1e-12);
  });
}

RegularizerStack prefix(const RegularizerStack& stack, size_t count) {
  RegularizerStack out;
  for (size_t i = 0; i < count; ++i) {
    const auto& t = stack.terms()[i];
    out.push(t.center, t.weight, t.power);
  }
  return out;
}

void check_framework(Suite& s) {
  const std::string mod = "ar_framework";
  s.block(mod, "epoch geometry", [&] {
    auto prob = generated(ProblemFamily::kCubicPower, 3);
    const double L3 = prob->known().L3->value;
    const Vec x0 = *prob->known().x_star + Vec::Constant(5, 0.5);
    const EpochSchedule sch = schedule_cubic(1e-3, dist_to_opt(*prob, x0), L3);
    ArOptions ao;
    ao.L = L3;
    auto base = oracle(prob);
    const ARResult r = ar_run(base, x0, sch, ao);
    std::vector<Vec> ref{*prob->known().x_star};
    double polish_residual = 0.0;
    for (int k = 1; k <= sch.S; ++k) {
      auto comp = compose(base, prefix(r.stack, k));
      RunOptions ro;
      ro.cubic_tol = 1e-11;
      const auto prm = AcnmParams::from_lipschitz(L3 + 4.0 * sch.sigmas[k - 1]);
      Vec z = acnm_run(*comp, r.epochs[k - 1].x_start, prm, 50 * sch.epoch_lengths[k - 1], ro).x_best;
      for (int it = 0; it < 20; ++it) {
        const Evaluation e = comp->audit(z, 2);
        if (e.g.norm() <= 1e-11) break;
        z -= e.H.matrix().ldlt().solve(e.g);
      }
      polish_residual = std::max(polish_residual, comp->audit(z, 1).g.norm());
      ref.push_back(z);
    }
    double mono = -1e300, contraction = -1e300;
    for (int k = 1; k <= sch.S; ++k) {
      const double prev = (r.epochs[k - 1].x_start - ref[k - 1]).norm();
      if (k >= 2) mono = std::max(mono, (r.epochs[k - 1].x_start - ref[k]).norm() - prev);
      contraction = std::max(contraction, (r.epochs[k - 1].x_out - ref[k]).norm() - 0.25 * prev);
    }
    s.at_most(mod, "reference epoch minimizers: max ||grad f_s||", polish_residual, 1e-10);
    s.at_most(mod, "epoch solutions move monotonically (excess distance)", mono, 1e-8);
    s.at_most(mod, "per-epoch contraction by 1/4 (excess distance)", contraction, 1e-8);
  });
  s.block(mod, "decomposition and call ceiling", [&] {
    double decomposition = 0.0, ceiling = 0.0;
    for (std::uint64_t seed : {1u, 2u}) {
      auto prob = generated(ProblemFamily::kCubicPower, seed);
      const double L3 = prob->known().L3->value;
      const Vec x0 = *prob->known().x_star + Vec::Constant(5, 1.0);
      const double D = dist_to_opt(*prob, x0);
      for (double eps : {1e-2, 1e-3}) {
        const EpochSchedule sch = schedule_cubic(eps, D, L3);
        ArOptions ao;
        ao.L = L3;
        const ARResult r = ar_run(oracle(prob), x0, sch, ao);
        const double lhs = prob->eval(r.x_hat, 1).g.norm();
        decomposition =
            std::max(decomposition, lhs / (r.grad_fs_at_x_hat.norm() + correction_norm_bound(r.stack, r.x_hat)));
        const double cap = std::ceil(128.0 * std::cbrt(L3) * std::pow(D, 2.0 / 3.0) / std::cbrt(eps) + 128.0 * sch.S);
        ceiling = std::max(ceiling, static_cast<double>(r.total_calls[2]) / cap);
      }
    }
    s.at_most(mod, "||grad f(x)|| / (||grad f_S(x)|| + correction bound)", decomposition, 1.0 + 1e-12);
    s.at_most(mod, "cubic schedule: order-2 calls / ceiling", ceiling, 1.0);
  });
  s.block(mod, "parameter-free output bound", [&] {
    auto prob = power_norm(4, 3.0);
    Vec x0 = *prob->known().x_star;
    x0(1) += 1.0;
    double worst = 0.0;
    for (double sigma1 : {1e-6, 1e-4, 1e-2}) {
      const ARResult r = ar_parameter_free(oracle(prob), x0, sigma1, 1.0);
      worst = std::max(worst, r.grad_f_at_x_hat.norm() / (3.0 * sigma1 * 81.0));
    }
    s.at_most(mod, "parameter-free: ||grad f(x)|| / (3 sigma_1 (9 dist)^2)", worst, 1.0);
  });
}

void check_uniform(Suite& s) {
  const std::string mod = "uniform_convex";
  s.block(mod, "restarts with q = p + 1", [&] {
    auto prob = power_norm(4, 3.0);
    Vec x0 = *prob->known().x_star;
    x0(1) += 1.0;
    const RestartResult r = restart_uniform(oracle(prob), x0, 4.0, 0.5, 2, 3.0, 1e-8);
    double dist = 0.0, halving = 0.0, spread = 0.0;
    for (const RestartEpoch& e : r.epochs) {
      dist = std::max(dist, (e.x_out - *prob->known().x_star).norm() /
                                distance_bound_from_gradient(e.grad_norm_out, 3.0, 0.5));
      halving = std::max(halving, e.grad_norm_out / e.grad_norm_in);
      spread = std::max(spread, std::abs(static_cast<double>(e.m_k - r.epochs.front().m_k)));
    }
    s.at_most(mod, "distance to x* / gradient-based bound at restart points", dist, 1.0 + 1e-12);
    s.at_most(mod, "halving: max ||nu_k|| / ||nu_{k-1}||", halving, 0.5);
    s.at_most(mod, "q = p + 1: epoch length constant (max deviation)", spread, 0.0);
  });
  s.block(mod, "restarts with q > p + 1", [&] {
    auto prob = power_norm(4, 4.0);
    Vec x0 = *prob->known().x_star;
    x0(1) += 1.0;
    const RestartResult r = restart_uniform(oracle(prob), x0, 6.0, prob->known().uniform->sigma, 2, 4.0, 1e-6);
    const double expected = std::pow(2.0, 2.0 / 21.0);
    double dev = 0.0;
    for (size_t i = 1; i < r.epochs.size(); ++i)
      dev = std::max(dev, std::abs(r.epochs[i].m_raw / r.epochs[i - 1].m_raw / expected - 1.0));
    s.at_most(mod, "q > p + 1: length ratio vs 2^(2/21) (relative deviation)", dev, 0.1);
  });
  s.block(mod, "restarts with q < p + 1", [&] {
    auto prob = generated(ProblemFamily::kLogistic, 1, 3.0, 0.1);
    const RestartResult r = restart_uniform(oracle(prob), Vec::Constant(5, 2.0), prob->known().L3->value,
                                            prob->known().uniform->sigma, 2, 2.0, 1e-14);
    int reached = 0, relapses = 0;
    for (const RestartEpoch& e : r.epochs) {
      if (e.m_k == 1) reached = 1;
      else if (reached) ++relapses;
    }
    s.at_least(mod, "q < p + 1: epoch length reaches 1", reached, 1.0);
    s.at_most(mod, "q < p + 1: epochs longer than 1 after reaching 1", relapses, 0.0);
  });
  s.block(mod, "parameter-free restarts", [&] {
    auto prob = power_norm(4, 3.0);
    Vec x0 = *prob->known().x_star;
    x0(1) += 1.0;
    const RestartResult r = pf_uniform(oracle(prob), x0, std::pow(4.0, 6) * prob->known().uniform->sigma, 1.0, 2, 1e-8);
    int rises = 0, late_misses = 0;
    size_t last_change = 0;
    for (size_t i = 1; i < r.epochs.size(); ++i) {
      if (r.epochs[i].sigma_estimate > r.epochs[i - 1].sigma_estimate) ++rises;
      if (r.epochs[i].sigma_estimate < r.epochs[i - 1].sigma_estimate) last_change = i;
    }
    for (size_t i = last_change; i < r.epochs.size(); ++i) late_misses += r.epochs[i].halved ? 0 : 1;
    s.at_most(mod, "sigma estimate never increases (count of increases)", rises, 0.0);
    s.at_most(mod, "rounds after the last sigma change that miss halving", late_misses, 0.0);
  });
}

void check_harness(Suite& s) {
  const std::string mod = "harness_cli";
  s.block(mod, "run records", [&] {
    ExperimentConfig cfg;
    cfg.problem.gen.family = ProblemFamily::kCubicPower;
    cfg.algorithm = Algorithm::kArCubic;
    cfg.eps_grid = {1e-2, 1e-3};
    const auto a = run_experiment(cfg);
    const auto b = run_experiment(cfg);
    int differ = 0;
    double counters = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
      std::ostringstream ca, cb;
      write_csv(a[i].trace, ca);
      write_csv(b[i].trace, cb);
      if (ca.str() != cb.str() || a[i].summary.config_hash != b[i].summary.config_hash) ++differ;
      std::array<std::int64_t, 3> sum{0, 0, 0}, prev{0, 0, 0};
      for (const TraceRow& row : a[i].trace.rows()) {
        const std::array<std::int64_t, 3> now{row.calls0, row.calls1, row.calls2};
        for (int k = 0; k < 3; ++k) sum[k] += now[k] - prev[k];
        prev = now;
      }
      for (int k = 0; k < 3; ++k) counters += std::abs(static_cast<double>(sum[k] - a[i].summary.total_calls[k]));
      counters += std::abs(a[i].trace.rows().back().grad_norm - a[i].summary.final_grad_norm);
    }
    if (summary_json(a) != summary_json(b)) ++differ;
    s.at_most(mod, "determinism: differing outputs between identical runs", differ, 0.0);
    s.at_most(mod, "counter integrity: |sum of row deltas - totals| + final-row mismatch", counters, 0.0);
  });
}

}  // namespace

std::vector<CheckResult> verify_suite(const VerifyOptions& opt) {
  Suite s(opt);
  const std::pair<const char*, void (*)(Suite&)> modules[] = {
      {"core_linalg", check_linalg},       {"cubic_solver", check_cubic},    {"problems", check_problems},
      {"regularization", check_regularization}, {"subroutines", check_subroutines}, {"ar_framework", check_framework},
      {"uniform_convex", check_uniform},   {"harness_cli", check_harness}};
  for (const auto& [name, fn] : modules)
    if (s.enabled(name)) fn(s);
  return s.take();
}

std::string format_report(const std::vector<CheckResult>& checks) {
  std::ostringstream out;
  int failed = 0;
  char line[512];
  std::snprintf(line, sizeof(line), "%-6s %-15s %-72s %14s %14s\n", "status", "module", "check", "measured",
                "limit");
  out << line;
  for (const CheckResult& c : checks) {
    failed += c.passed ? 0 : 1;
    std::snprintf(line, sizeof(line), "%-6s %-15s %-72s %14.6g %14.6g\n", c.passed ? "PASS" : "FAIL",
                  c.module.c_str(), c.name.c_str(), c.measured, c.limit);
    out << line;
    if (!c.detail.empty()) out << "       " << c.detail << '\n';
  }
  out << checks.size() - failed << " of " << checks.size() << " checks passed\n";
  return out.str();
}

}  // namespace argmin::harness
