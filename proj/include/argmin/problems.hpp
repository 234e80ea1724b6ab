#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "argmin/oracle.hpp"

namespace argmin {

enum class ProblemFamily { kQuadratic, kCubicPower, kPowerNorm, kLogistic, kLogSumExp };

const char* to_string(ProblemFamily f);
/// Throws Error(kConfig) for an unknown name.
ProblemFamily parse_problem_family(const std::string& name);

/// A constant together with whether it was derived analytically or estimated numerically.
struct Constant {
  double value = 0.0;
  bool estimated = false;
};

/// Degree-q uniform convexity: f(x) >= f(y) + <g(y), x-y> + (sigma/q) ||x-y||^q.
struct UniformConvexity {
  double q = 2.0;
  double sigma = 0.0;
  bool estimated = false;
};

struct KnownConstants {
  std::optional<Constant> L2;  ///< gradient Lipschitz constant
  std::optional<Constant> L3;  ///< Hessian Lipschitz constant
  std::optional<UniformConvexity> uniform;
  std::optional<Vec> x_star;
  std::optional<double> f_star;
};

/**
 * Parameters of a test objective.
 *   quadratic    f = x'Ax/2 - b'x                        (A symmetric PSD)
 *   cubic_power  f = (1/3) sum_i |a_i'x - b_i|^3
 *   power_norm   f = (1/q) ||x - center||^q              (q >= 2)
 *   logistic     f = (1/m) sum_i log(1 + exp(-y_i a_i'x)) + (reg/2) ||x||^2
 *   logsumexp    f = t log sum_i exp((a_i'x - b_i) / t)
 */
struct ProblemSpec {
  ProblemFamily family = ProblemFamily::kQuadratic;
  Mat A;
  Vec b;
  double q = 3.0;
  Vec center;
  Vec labels;
  double reg = 0.0;
  double t = 1.0;
};

/// Seeded random instance of a family. `n` is the dimension, `m` the number of rows.
struct GeneratorParams {
  ProblemFamily family = ProblemFamily::kQuadratic;
  Eigen::Index n = 5;
  Eigen::Index m = 8;
  double q = 3.0;
  double reg = 0.0;
  double t = 1.0;
  /// Condition number of the quadratic's A.
  double cond = 100.0;
};

ProblemSpec generate_spec(const GeneratorParams& params, std::uint64_t seed);

/// A smooth convex test objective with whatever constants are known about it.
class Problem {
 public:
  virtual ~Problem() = default;

  virtual Eigen::Index dim() const = 0;
  virtual std::string name() const = 0;
  /// Value, and gradient/Hessian up to `order`. base_f/base_g mirror f/g.
  virtual Evaluation eval(const Vec& x, int order) const = 0;

  const KnownConstants& known() const { return known_; }

 protected:
  KnownConstants known_;
};

/// Builds a problem from its spec. Throws Error(kInvalidArgument) on bad parameters.
std::shared_ptr<const Problem> make_problem(const ProblemSpec& spec);

/// Counted oracle over a problem; owns a fresh counter.
class ProblemOracle : public Oracle {
 public:
  explicit ProblemOracle(std::shared_ptr<const Problem> problem);

  Eigen::Index dim() const override { return problem_->dim(); }
  Evaluation audit(const Vec& x, int order) const override { return problem_->eval(x, order); }

  const Problem& problem() const { return *problem_; }
  std::shared_ptr<const Problem> shared_problem() const { return problem_; }

 private:
  std::shared_ptr<const Problem> problem_;
};

/**
 * Upper bound on dist(x0, X*): exact when x* is known, otherwise the
 * uniform-convexity bound (q ||g(x0)|| / (2 sigma_q))^(1/(q-1)).
 * Throws Error(kDistanceUnavailable) when neither is known.
 */
double dist_to_opt(const Problem& p, const Vec& x0);

/// Same bound from a gradient norm and uniform-convexity data.
double distance_bound_from_gradient(double grad_norm, double q, double sigma);

}  // namespace argmin
