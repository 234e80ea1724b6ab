#pragma once

#include <memory>
#include <vector>

#include "argmin/oracle.hpp"

namespace argmin {

/// w/kappa * ||x - center||^kappa with weight w >= 0 and power kappa >= 2.
struct PowerProxTerm {
  Vec center;
  double weight = 0.0;
  double power = 3.0;
};

struct ProxEval {
  double value = 0.0;
  Vec gradient;
  SymMat hessian;
};

/**
 * Value and derivatives of one prox term. At x = center the gradient is zero
 * and the Hessian is w*I when kappa = 2 and zero otherwise.
 */
ProxEval prox_eval(const PowerProxTerm& t, const Vec& x, int order);

/**
 * The accumulated regularizer sum_i w_i/kappa ||x - c_i||^kappa. Weights are
 * the increments sigma_i - sigma_{i-1}; sigma() re-sums them on every call.
 */
class RegularizerStack {
 public:
  RegularizerStack() = default;

  /// Appends a term. Throws Error(kInvalidArgument) if weight < 0 (or == 0
  /// after the first term) or power < 2.
  void push(const Vec& center, double weight, double power);

  const std::vector<PowerProxTerm>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }
  double sigma() const;

  /// Sum over all terms; the gradient/Hessian are present up to `order`.
  ProxEval eval(const Vec& x, int order) const;

 private:
  std::vector<PowerProxTerm> terms_;
};

/// sum_i w_i ||x - c_i||^(kappa_i - 1), which bounds ||grad f(x) - grad f_s(x)||.
double correction_norm_bound(const RegularizerStack& stack, const Vec& x);

/// grad f(x) from grad f_s(x): subtracts the stack's analytic gradient.
Vec recover_subgradient(const RegularizerStack& stack, const Vec& grad_fs, const Vec& x);

/**
 * f_s = base + stack. Calls are recorded once on the base oracle's counter;
 * the stack itself is free. Each evaluation carries the base value and
 * gradient alongside the composed ones.
 */
class ComposedOracle : public Oracle {
 public:
  ComposedOracle(std::shared_ptr<const Oracle> base, RegularizerStack stack);

  Eigen::Index dim() const override { return base_->dim(); }
  Evaluation audit(const Vec& x, int order) const override;

  const RegularizerStack& stack() const { return stack_; }
  const Oracle& base() const { return *base_; }

 private:
  std::shared_ptr<const Oracle> base_;
  RegularizerStack stack_;
};

/// Builds the composed oracle sharing `base`'s counter.
std::shared_ptr<ComposedOracle> compose(std::shared_ptr<const Oracle> base, RegularizerStack stack);

}  // namespace argmin
