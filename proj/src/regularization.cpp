#include "argmin/regularization.hpp"

#include <cmath>

#include "argmin/error.hpp"

namespace argmin {

ProxEval prox_eval(const PowerProxTerm& t, const Vec& x, int order) {
  const Vec u = x - t.center;
  const double r = u.norm();
  const double k = t.power;
  ProxEval out;
  out.value = r > 0.0 ? t.weight * std::pow(r, k) / k : 0.0;
  if (order >= 1) {
    out.gradient = r > 0.0 ? Vec(t.weight * std::pow(r, k - 2.0) * u) : Vec(Vec::Zero(x.size()));
  }
  if (order >= 2) {
    Mat H = Mat::Zero(x.size(), x.size());
    if (r > 0.0) {
      H.diagonal().array() += t.weight * std::pow(r, k - 2.0);
      if (k != 2.0) H.noalias() += t.weight * (k - 2.0) * std::pow(r, k - 4.0) * u * u.transpose();
    } else if (k == 2.0) {
      H.diagonal().array() += t.weight;
    }
    out.hessian = SymMat(H);
  }
  return out;
}

void RegularizerStack::push(const Vec& center, double weight, double power) {
  if (!(power >= 2.0)) throw Error(ErrorCode::kInvalidArgument, "regularizer power must be >= 2");
  if (!(weight >= 0.0) || (!terms_.empty() && !(weight > 0.0)))
    throw Error(ErrorCode::kInvalidArgument, "regularizer weights must increase sigma strictly");
  if (!terms_.empty() && center.size() != terms_.front().center.size())
    throw Error(ErrorCode::kInvalidArgument, "regularizer center dimension mismatch");
  terms_.push_back(PowerProxTerm{center, weight, power});
}

double RegularizerStack::sigma() const {
  double s = 0.0;
  for (const PowerProxTerm& t : terms_) s += t.weight;
  return s;
}

ProxEval RegularizerStack::eval(const Vec& x, int order) const {
  const Eigen::Index n = x.size();
  ProxEval out;
  if (order >= 1) out.gradient = Vec::Zero(n);
  if (order >= 2) out.hessian = SymMat::zero(n);
  for (const PowerProxTerm& t : terms_) {
    const ProxEval e = prox_eval(t, x, order);
    out.value += e.value;
    if (order >= 1) out.gradient += e.gradient;
    if (order >= 2) out.hessian += e.hessian;
  }
  return out;
}

double correction_norm_bound(const RegularizerStack& stack, const Vec& x) {
  double s = 0.0;
  for (const PowerProxTerm& t : stack.terms()) s += t.weight * std::pow((x - t.center).norm(), t.power - 1.0);
  return s;
}

Vec recover_subgradient(const RegularizerStack& stack, const Vec& grad_fs, const Vec& x) {
  if (stack.empty()) return grad_fs;
  return grad_fs - stack.eval(x, 1).gradient;
}

ComposedOracle::ComposedOracle(std::shared_ptr<const Oracle> base, RegularizerStack stack)
    : Oracle(base ? base->shared_counter() : nullptr), base_(std::move(base)), stack_(std::move(stack)) {
  if (!base_) throw Error(ErrorCode::kInvalidArgument, "compose: null base oracle");
}

Evaluation ComposedOracle::audit(const Vec& x, int order) const {
  Evaluation e = base_->audit(x, order);
  if (stack_.empty()) return e;
  const ProxEval r = stack_.eval(x, order);
  e.f += r.value;
  if (order >= 1) e.g += r.gradient;
  if (order >= 2) e.H += r.hessian;
  return e;
}

std::shared_ptr<ComposedOracle> compose(std::shared_ptr<const Oracle> base, RegularizerStack stack) {
  return std::make_shared<ComposedOracle>(std::move(base), std::move(stack));
}

}  // namespace argmin
