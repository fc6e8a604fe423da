#pragma once

// Per-user dispatch: for a fixed charge/discharge row, choose grid purchases
// and controllable-load allocations at minimum cost, and report how that
// minimum moves with the row.

#include <cstddef>
#include <utility>
#include <vector>

#include "esscoord/agent.hpp"
#include "esscoord/lp.hpp"
#include "esscoord/scenario.hpp"

namespace esscoord {

struct UserLp {
  lp::LpProblem problem;
  /// sum_n (-sell_n * C_n + buy_n * D_n); added to the LP objective to get the cost.
  double constant = 0.0;
  /// Combined row index of the balance row of each slot ("neutrality:n").
  std::vector<std::size_t> neutrality_rows;
  /// Segment variables making up G_n, per slot.
  std::vector<std::vector<std::size_t>> grid_vars;
  /// load_vars[q][n] is the allocation variable, or -1 outside the window.
  std::vector<std::vector<std::ptrdiff_t>> load_vars;
};

/// Variables: one bounded variable per grid-cost segment per slot (their sum
/// is G_n) and one per controllable load per slot in its window.
/// Rows: "energy:q" equalities and "neutrality:n" balance rows
///   G_n - sum_q L_qn >= C_n - D_n - net_n.
UserLp build_user_lp(const UserProfile& user, const PriceRow& prices, const PlanRow& plan);

struct DispatchSolution {
  std::vector<double> grid_energy;
  std::vector<std::vector<double>> load_alloc;  // per load, full horizon, zero outside window
  double cost = 0.0;
  /// A representative multiplier of each balance row (the basis dual).
  std::vector<double> duals;
};

/// Throws InfeasibleDispatchError if the dispatch LP has no solution.
DispatchSolution solve_user(const UserProfile& user, const PriceRow& prices, const PlanRow& plan,
                            const lp::ToleranceSet& tol = {});

/// Extremes of each balance multiplier over the optimal dual set, turned into
/// one-sided derivatives:
///   charge_right    = -sell + max lambda     charge_left    = -sell + min lambda
///   discharge_right =  buy  - min lambda     discharge_left =  buy  - max lambda
DerivativeReport derivative_report(const UserProfile& user, const PriceRow& prices, const PlanRow& plan,
                                   const lp::ToleranceSet& tol = {});

/// Same, also returning the dispatch at `plan`.
std::pair<DispatchSolution, DerivativeReport> evaluate_user(const UserProfile& user, const PriceRow& prices,
                                                            const PlanRow& plan, const lp::ToleranceSet& tol = {});

}  // namespace esscoord
