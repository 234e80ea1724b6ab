#include <cmath>

#include "argmin/error.hpp"
#include "argmin/subroutines.hpp"

namespace argmin {

const char* to_string(Contract c) {
  switch (c) {
    case Contract::kHoelder: return "hoelder";
    case Contract::kLipschitz: return "lipschitz";
    case Contract::kLineSearch: return "line_search";
  }
  return "unknown";
}

bool ContractReport::all_held() const {
  for (const ContractClause& c : clauses)
    if (c.held != c.checked) return false;
  return true;
}

namespace {

constexpr double kRelSlack = 1e-9;

void tally(ContractClause& clause, double lhs, double scale, double claimed) {
  if (!(scale > 0.0)) return;
  const double ratio = lhs / scale;
  clause.checked++;
  clause.measured_constant = std::max(clause.measured_constant, ratio);
  if (ratio <= claimed * (1.0 + kRelSlack)) clause.held++;
}

}  // namespace

ContractReport check_contract(const std::vector<IterateRecord>& iterates, Contract c,
                              const ContractInputs& in) {
  if (in.x0.size() != in.x_star.size())
    throw Error(ErrorCode::kInvalidArgument, "check_contract: x0 and x_star differ in dimension");
  const double D = (in.x0 - in.x_star).norm();
  const double pnu = in.p + in.nu;
  const int N = in.N;

  ContractReport rep;
  rep.contract = c;
  ContractClause gap{"function_gap", 0, 0, 0.0};
  ContractClause grad{"window_gradient", 0, 0, 0.0};

  double window_min = std::numeric_limits<double>::infinity();
  double L_2N = 0.0;
  // Best-value sequence z_k for the line-search gradient clause.
  double best_f = std::numeric_limits<double>::infinity();
  double grad_at_best = 0.0;

  for (const IterateRecord& it : iterates) {
    const double gap_k = it.f_s - in.f_star;
    if (it.f_s < best_f) {
      best_f = it.f_s;
      grad_at_best = it.grad_fs_norm;
    }
    switch (c) {
      case Contract::kHoelder:
        if (it.k >= 2) tally(gap, gap_k, in.L * std::pow(D, pnu) / std::pow(it.k - 1.0, pnu), in.C_A);
        break;
      case Contract::kLipschitz:
        tally(gap, gap_k, in.L * std::pow(D, in.p + 1.0) / std::pow(it.k, (3.0 * in.p + 1.0) / 2.0), in.C_A);
        break;
      case Contract::kLineSearch:
        if (it.k >= 2) tally(gap, gap_k, it.L * std::pow(D, pnu) / std::pow(it.k - 1.0, pnu), in.C_A);
        break;
    }
    if (N > 0 && it.k > N && it.k <= 2 * N) {
      window_min = std::min(window_min, c == Contract::kLineSearch ? grad_at_best : it.grad_fs_norm);
      if (it.k == 2 * N) L_2N = it.L;
    }
  }
  rep.clauses.push_back(gap);

  if (N > 0 && std::isfinite(window_min)) {
    switch (c) {
      case Contract::kHoelder:
        if (N >= 2) tally(grad, window_min, in.L * std::pow(D, pnu - 1.0) / std::pow(N - 1.0, pnu - 1.0), in.C_A);
        break;
      case Contract::kLipschitz:
        tally(grad, window_min, in.L * std::pow(D, in.p) / std::pow(N, 1.5 * in.p), in.C_A);
        break;
      case Contract::kLineSearch:
        tally(grad, window_min,
              L_2N * std::pow(D, pnu - 1.0) / std::pow(2.0 * N - 1.0, (pnu - 1.0) * (pnu + 1.0) / pnu), in.C_A);
        break;
    }
    rep.clauses.push_back(grad);
  }
  return rep;
}

}  // namespace argmin
