#pragma once

#include <array>
#include <cstdint>
#include <memory>

#include "argmin/linalg.hpp"

namespace argmin {

/// Oracle calls by derivative order. An order-k call counts once at every order 0..k.
class OracleCounter {
 public:
  void record(int order);
  std::int64_t calls(int order) const { return calls_.at(static_cast<size_t>(order)); }
  const std::array<std::int64_t, 3>& all() const { return calls_; }

 private:
  std::array<std::int64_t, 3> calls_{0, 0, 0};
};

/// Result of a zeroth-, first- or second-order oracle call.
struct Evaluation {
  int order = 0;
  double f = 0.0;
  Vec g;     ///< set when order >= 1
  SymMat H;  ///< set when order == 2

  /// Value and gradient of the unregularized objective at the same point.
  /// Equal to f and g for a plain problem oracle.
  double base_f = 0.0;
  Vec base_g;
};

/**
 * A differentiable objective behind a call counter. `evaluate` is what
 * algorithms use and is counted; `audit` returns the same numbers without
 * touching the counter and is reserved for diagnostics.
 */
class Oracle {
 public:
  explicit Oracle(std::shared_ptr<OracleCounter> counter);
  virtual ~Oracle() = default;

  virtual Eigen::Index dim() const = 0;
  virtual Evaluation audit(const Vec& x, int order) const = 0;

  /// Counted evaluation. Throws Error(kNonFinite) if the result contains NaN/Inf.
  Evaluation evaluate(const Vec& x, int order);

  const OracleCounter& counter() const { return *counter_; }
  std::shared_ptr<OracleCounter> shared_counter() const { return counter_; }

 private:
  std::shared_ptr<OracleCounter> counter_;
};

}  // namespace argmin
