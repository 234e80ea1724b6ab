#include "argmin/problems.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <random>

#include "argmin/error.hpp"

namespace argmin {

void OracleCounter::record(int order) {
  if (order < 0 || order > 2)
    throw Error(ErrorCode::kInvalidArgument, "oracle order must be 0, 1 or 2");
  for (int k = 0; k <= order; ++k) ++calls_[static_cast<size_t>(k)];
}

Oracle::Oracle(std::shared_ptr<OracleCounter> counter) : counter_(std::move(counter)) {
  if (!counter_) counter_ = std::make_shared<OracleCounter>();
}

Evaluation Oracle::evaluate(const Vec& x, int order) {
  counter_->record(order);
  Evaluation e = audit(x, order);
  const bool finite = std::isfinite(e.f) && (order < 1 || all_finite(e.g)) &&
                      (order < 2 || e.H.all_finite());
  if (!finite) throw Error(ErrorCode::kNonFinite, "oracle returned a non-finite value");
  return e;
}

const char* to_string(ProblemFamily f) {
  switch (f) {
    case ProblemFamily::kQuadratic:
      return "quadratic";
    case ProblemFamily::kCubicPower:
      return "cubic_power";
    case ProblemFamily::kPowerNorm:
      return "power_norm";
    case ProblemFamily::kLogistic:
      return "logistic";
    case ProblemFamily::kLogSumExp:
      return "logsumexp";
  }
  return "unknown";
}

ProblemFamily parse_problem_family(const std::string& name) {
  for (ProblemFamily f : {ProblemFamily::kQuadratic, ProblemFamily::kCubicPower,
                          ProblemFamily::kPowerNorm, ProblemFamily::kLogistic,
                          ProblemFamily::kLogSumExp})
    if (name == to_string(f)) return f;
  throw Error(ErrorCode::kConfig, "unknown problem family '" + name + "'");
}

namespace {

Evaluation make_eval(int order, double f) {
  Evaluation e;
  e.order = order;
  e.f = f;
  e.base_f = f;
  return e;
}

void finish(Evaluation& e) { e.base_g = e.g; }

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double ez = std::exp(z);
  return ez / (1.0 + ez);
}

// Largest observed ||H(x) - H(y)|| / ||x - y|| over seeded random pairs.
double sample_hessian_lipschitz(const Problem& p, double radius, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  double best = 0.0;
  const Eigen::Index n = p.dim();
  for (int trial = 0; trial < 400; ++trial) {
    Vec x(n), d(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      x(i) = radius * nd(rng);
      d(i) = nd(rng);
    }
    d *= std::pow(10.0, -2.0 + 2.5 * (trial % 5) / 4.0) / d.norm();
    const SymMat hx = p.eval(x, 2).H;
    const SymMat hy = p.eval(x + d, 2).H;
    best = std::max(best, spectral_norm(SymMat(hx.matrix() - hy.matrix())) / d.norm());
  }
  return best;
}

class Quadratic final : public Problem {
 public:
  Quadratic(const Mat& A, const Vec& b) : A_(A), b_(b) {
    if (A.rows() == 0 || A.rows() != A.cols() || b.size() != A.rows())
      throw Error(ErrorCode::kInvalidArgument, "quadratic: A must be square and match b");
    const EigDecomp e = sym_eig(A_);
    const double scale = std::max(1.0, e.eigvals.cwiseAbs().maxCoeff());
    if (e.lambda_min() < -1e-12 * scale)
      throw Error(ErrorCode::kInvalidArgument, "quadratic: A is not positive semidefinite");
    known_.L2 = Constant{e.lambda_max(), false};
    known_.L3 = Constant{0.0, false};
    if (e.lambda_min() > 0.0) {
      const Vec xs = solve_shifted(e, 0.0, -b_);
      known_.x_star = xs;
      known_.f_star = -0.5 * b_.dot(xs);
      known_.uniform = UniformConvexity{2.0, e.lambda_min(), false};
    }
  }

  Eigen::Index dim() const override { return A_.dim(); }
  std::string name() const override { return "quadratic"; }

  Evaluation eval(const Vec& x, int order) const override {
    const Vec ax = A_ * x;
    Evaluation e = make_eval(order, 0.5 * x.dot(ax) - b_.dot(x));
    if (order >= 1) e.g = ax - b_;
    if (order >= 2) e.H = A_;
    finish(e);
    return e;
  }

 private:
  SymMat A_;
  Vec b_;
};

// (1/2) min over the unit sphere of sum_i |a_i'u|^3, by projected gradient from many starts.
double cubic_power_sigma3(const Mat& A) {
  const Eigen::Index n = A.cols();
  auto F = [&](const Vec& u) { return (A * u).array().abs().cube().sum(); };
  auto grad = [&](const Vec& u) {
    const Vec r = A * u;
    return Vec(3.0 * A.transpose() * (r.array().abs() * r.array()).matrix());
  };
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<Vec> starts;
  const EigDecomp e = sym_eig(SymMat(A.transpose() * A));
  for (Eigen::Index i = 0; i < n; ++i) starts.push_back(e.eigvecs.col(i));
  for (int s = 0; s < 64; ++s) {
    Vec u(n);
    for (Eigen::Index i = 0; i < n; ++i) u(i) = nd(rng);
    starts.push_back(u.normalized());
  }
  double best = std::numeric_limits<double>::infinity();
  for (Vec u : starts) {
    double fu = F(u);
    double eta = 1.0;
    for (int it = 0; it < 2000; ++it) {
      Vec g = grad(u);
      g -= g.dot(u) * u;
      if (g.norm() <= 1e-14 * std::max(1.0, fu)) break;
      bool moved = false;
      for (int ls = 0; ls < 60; ++ls) {
        const Vec v = (u - eta * g).normalized();
        const double fv = F(v);
        if (fv < fu) {
          u = v;
          fu = fv;
          eta *= 2.0;
          moved = true;
          break;
        }
        eta *= 0.5;
      }
      if (!moved) break;
    }
    best = std::min(best, fu);
  }
  return 0.5 * best;
}

class CubicPower final : public Problem {
 public:
  CubicPower(const Mat& A, const Vec& b) : A_(A), b_(b) {
    if (A.rows() == 0 || A.cols() == 0 || b.size() != A.rows())
      throw Error(ErrorCode::kInvalidArgument, "cubic_power: A must be non-empty and match b");
    known_.L3 = Constant{2.0 * A.rowwise().norm().array().cube().sum(), false};
    Eigen::ColPivHouseholderQR<Mat> qr(A);
    if (qr.rank() == A.cols()) {
      known_.uniform = UniformConvexity{3.0, cubic_power_sigma3(A), true};
      const Vec xs = qr.solve(b);
      if ((A * xs - b).norm() <= 1e-12 * std::max(1.0, b.norm())) {
        known_.x_star = xs;
        known_.f_star = 0.0;
      }
    }
  }

  Eigen::Index dim() const override { return A_.cols(); }
  std::string name() const override { return "cubic_power"; }

  Evaluation eval(const Vec& x, int order) const override {
    const Vec r = A_ * x - b_;
    const Eigen::ArrayXd ar = r.array().abs();
    Evaluation e = make_eval(order, (ar.cube().sum()) / 3.0);
    if (order >= 1) e.g = A_.transpose() * (ar * r.array()).matrix();
    if (order >= 2) e.H = SymMat(A_.transpose() * (2.0 * ar).matrix().asDiagonal() * A_);
    finish(e);
    return e;
  }

 private:
  Mat A_;
  Vec b_;
};

class PowerNorm final : public Problem {
 public:
  PowerNorm(double q, const Vec& center) : q_(q), c_(center) {
    if (!(q >= 2.0)) throw Error(ErrorCode::kInvalidArgument, "power_norm: q must be >= 2");
    if (center.size() == 0) throw Error(ErrorCode::kInvalidArgument, "power_norm: empty center");
    known_.x_star = c_;
    known_.f_star = 0.0;
    known_.uniform = UniformConvexity{q, std::pow(2.0, -(q - 2.0)), false};
    if (q == 2.0) {
      known_.L2 = Constant{1.0, false};
      known_.L3 = Constant{0.0, false};
    } else if (q == 3.0) {
      known_.L3 = Constant{4.0, false};
    }
  }

  Eigen::Index dim() const override { return c_.size(); }
  std::string name() const override { return "power_norm"; }

  Evaluation eval(const Vec& x, int order) const override {
    const Vec u = x - c_;
    const double r = u.norm();
    Evaluation e = make_eval(order, std::pow(r, q_) / q_);
    if (order >= 1) e.g = r > 0.0 ? Vec(std::pow(r, q_ - 2.0) * u) : Vec(Vec::Zero(u.size()));
    if (order >= 2) {
      Mat H = Mat::Zero(u.size(), u.size());
      if (r > 0.0) {
        H.diagonal().array() += std::pow(r, q_ - 2.0);
        H.noalias() += (q_ - 2.0) * std::pow(r, q_ - 4.0) * u * u.transpose();
      } else if (q_ == 2.0) {
        H.setIdentity();
      }
      e.H = SymMat(H);
    }
    finish(e);
    return e;
  }

 private:
  double q_;
  Vec c_;
};

class Logistic final : public Problem {
 public:
  Logistic(const Mat& A, const Vec& y, double reg) : A_(A), y_(y), reg_(reg) {
    if (A.rows() == 0 || A.cols() == 0 || y.size() != A.rows())
      throw Error(ErrorCode::kInvalidArgument, "logistic: A must be non-empty and match labels");
    if (!(reg >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "logistic: reg must be >= 0");
    const double m = static_cast<double>(A.rows());
    known_.L2 = Constant{spectral_norm(SymMat(A.transpose() * A)) / (4.0 * m) + reg, false};
    known_.L3 = Constant{sample_hessian_lipschitz(*this, 1.0, 17), true};
    if (reg > 0.0) known_.uniform = UniformConvexity{2.0, reg, false};
  }

  Eigen::Index dim() const override { return A_.cols(); }
  std::string name() const override { return "logistic"; }

  Evaluation eval(const Vec& x, int order) const override {
    const double m = static_cast<double>(A_.rows());
    const Vec z = (y_.array() * (A_ * x).array()).matrix();
    double f = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) f += softplus(-z(i));
    Evaluation e = make_eval(order, f / m + 0.5 * reg_ * x.squaredNorm());
    if (order >= 1) {
      Vec w(z.size());
      for (Eigen::Index i = 0; i < z.size(); ++i) w(i) = -y_(i) * sigmoid(-z(i));
      e.g = A_.transpose() * w / m + reg_ * x;
    }
    if (order >= 2) {
      Vec d(z.size());
      for (Eigen::Index i = 0; i < z.size(); ++i) {
        const double s = sigmoid(z(i));
        d(i) = s * (1.0 - s);
      }
      Mat H = A_.transpose() * d.asDiagonal() * A_ / m;
      H.diagonal().array() += reg_;
      e.H = SymMat(H);
    }
    finish(e);
    return e;
  }

 private:
  Mat A_;
  Vec y_;
  double reg_;
};

class LogSumExp final : public Problem {
 public:
  LogSumExp(const Mat& A, const Vec& b, double t) : A_(A), b_(b), t_(t) {
    if (A.rows() == 0 || A.cols() == 0 || b.size() != A.rows())
      throw Error(ErrorCode::kInvalidArgument, "logsumexp: A must be non-empty and match b");
    if (!(t > 0.0)) throw Error(ErrorCode::kInvalidArgument, "logsumexp: t must be positive");
    known_.L2 = Constant{A.rowwise().squaredNorm().maxCoeff() / t, false};
    known_.L3 = Constant{sample_hessian_lipschitz(*this, 1.0, 23), true};
  }

  Eigen::Index dim() const override { return A_.cols(); }
  std::string name() const override { return "logsumexp"; }

  Evaluation eval(const Vec& x, int order) const override {
    const Vec z = (A_ * x - b_) / t_;
    const double zmax = z.maxCoeff();
    const Vec w = (z.array() - zmax).exp().matrix();
    const double sw = w.sum();
    Evaluation e = make_eval(order, t_ * (zmax + std::log(sw)));
    const Vec p = w / sw;
    if (order >= 1) e.g = A_.transpose() * p;
    if (order >= 2) {
      const Vec ap = A_.transpose() * p;
      Mat H = A_.transpose() * p.asDiagonal() * A_ - ap * ap.transpose();
      e.H = SymMat(H / t_);
    }
    finish(e);
    return e;
  }

 private:
  Mat A_;
  Vec b_;
  double t_;
};

}  // namespace

std::shared_ptr<const Problem> make_problem(const ProblemSpec& spec) {
  switch (spec.family) {
    case ProblemFamily::kQuadratic:
      return std::make_shared<Quadratic>(spec.A, spec.b);
    case ProblemFamily::kCubicPower:
      return std::make_shared<CubicPower>(spec.A, spec.b);
    case ProblemFamily::kPowerNorm:
      return std::make_shared<PowerNorm>(spec.q, spec.center);
    case ProblemFamily::kLogistic:
      return std::make_shared<Logistic>(spec.A, spec.labels, spec.reg);
    case ProblemFamily::kLogSumExp:
      return std::make_shared<LogSumExp>(spec.A, spec.b, spec.t);
  }
  throw Error(ErrorCode::kInvalidArgument, "make_problem: unknown family");
}

ProblemSpec generate_spec(const GeneratorParams& params, std::uint64_t seed) {
  if (params.n < 1 || params.m < 1)
    throw Error(ErrorCode::kInvalidArgument, "generate_spec: n and m must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  auto gaussian = [&](Eigen::Index rows, Eigen::Index cols) {
    Mat m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = nd(rng);
    return m;
  };
  const Eigen::Index n = params.n;
  const Eigen::Index m = params.m;
  ProblemSpec spec;
  spec.family = params.family;
  spec.q = params.q;
  spec.reg = params.reg;
  spec.t = params.t;
  switch (params.family) {
    case ProblemFamily::kQuadratic: {
      if (!(params.cond >= 1.0))
        throw Error(ErrorCode::kInvalidArgument, "generate_spec: cond must be >= 1");
      Eigen::HouseholderQR<Mat> qr(gaussian(n, n));
      const Mat Q = qr.householderQ() * Mat::Identity(n, n);
      Vec lam(n);
      for (Eigen::Index i = 0; i < n; ++i)
        lam(i) = n == 1 ? 1.0 : std::pow(params.cond, -static_cast<double>(i) / (n - 1));
      spec.A = Q * lam.asDiagonal() * Q.transpose();
      spec.A = 0.5 * (spec.A + spec.A.transpose());
      spec.b = spec.A * gaussian(n, 1).col(0);
      break;
    }
    case ProblemFamily::kCubicPower: {
      spec.A = gaussian(m, n) / std::sqrt(static_cast<double>(n));
      spec.b = spec.A * gaussian(n, 1).col(0);
      break;
    }
    case ProblemFamily::kPowerNorm:
      spec.center = gaussian(n, 1).col(0);
      break;
    case ProblemFamily::kLogistic: {
      spec.A = gaussian(m, n);
      const Vec w = gaussian(n, 1).col(0);
      const Vec z = spec.A * w + gaussian(m, 1).col(0);
      spec.labels = z.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });
      break;
    }
    case ProblemFamily::kLogSumExp: {
      const Mat B = gaussian(m, n) / std::sqrt(static_cast<double>(n));
      spec.A.resize(2 * m, n);
      spec.A << B, -B;
      spec.b = gaussian(2 * m, 1).col(0);
      break;
    }
  }
  return spec;
}

ProblemOracle::ProblemOracle(std::shared_ptr<const Problem> problem)
    : Oracle(std::make_shared<OracleCounter>()), problem_(std::move(problem)) {
  if (!problem_) throw Error(ErrorCode::kInvalidArgument, "ProblemOracle: null problem");
}

double distance_bound_from_gradient(double grad_norm, double q, double sigma) {
  if (!(q > 1.0) || !(sigma > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "distance bound needs q > 1 and sigma > 0");
  return std::pow(q * grad_norm / (2.0 * sigma), 1.0 / (q - 1.0));
}

double dist_to_opt(const Problem& p, const Vec& x0) {
  const KnownConstants& k = p.known();
  if (k.x_star) return (x0 - *k.x_star).norm();
  if (k.uniform) return distance_bound_from_gradient(p.eval(x0, 1).g.norm(), k.uniform->q, k.uniform->sigma);
  throw Error(ErrorCode::kDistanceUnavailable,
              "dist_to_opt: neither a minimizer nor a uniform-convexity constant is known for " + p.name());
}

}  // namespace argmin
