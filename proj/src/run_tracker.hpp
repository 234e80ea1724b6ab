#pragma once

// Bookkeeping shared by the inner solvers: trace rows, the designated output
// x_N, the small-gradient selection and the best-value sequence z_k.

#include <optional>

#include "argmin/error.hpp"
#include "argmin/subroutines.hpp"

namespace argmin::detail {

/// Counted evaluation that reports NaN/Inf iterates and values as divergence.
Evaluation eval_checked(Oracle& oracle, const Vec& x, int order);

class RunTracker {
 public:
  /// N <= 0 means the run length is decided later through set_N.
  RunTracker(Oracle& oracle, const RunOptions& opt, int N, double f0);

  void observe(int k, const Vec& x, const Evaluation& e, double L,
               double r1 = std::numeric_limits<double>::quiet_NaN(),
               double r2 = std::numeric_limits<double>::quiet_NaN());

  /// Fixes N to the most recently observed iteration.
  void set_N(int N, double L_at_N);
  int N() const { return N_; }
  bool N_known() const { return N_ > 0; }
  /// Iterations still to run after k given N and the window setting.
  bool done(int k) const;

  SubroutineResult finish(double L_at_2N);
  RelationStats& relations() { return relations_; }

 private:
  struct Candidate {
    int k = 0;
    Vec x;
    Vec grad_fs;
    Vec grad_f;
    double f = 0.0;
    double metric = 0.0;
    double f_base = 0.0;
  };

  void offer(std::optional<Candidate>& slot, const Candidate& c);

  Oracle& oracle_;
  RunOptions opt_;
  int N_;
  double f0_;
  RunTrace trace_;
  RelationStats relations_;
  std::vector<IterateRecord> iterates_;

  int last_k_ = 0;
  Vec last_x_;
  Evaluation last_eval_;
  double last_L_ = 0.0;

  Vec out_x_;
  Evaluation out_eval_;
  double L_at_N_ = 0.0;

  // Lowest-f_s iterate seen so far.
  Candidate z_;
  bool have_z_ = false;

  std::optional<Candidate> stop_hit_;
  std::optional<Candidate> prefix_best_;
  std::optional<Candidate> window_best_;
};

}  // namespace argmin::detail
