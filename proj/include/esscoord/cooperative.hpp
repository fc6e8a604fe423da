#pragma once

// Joint minimum of the total cost over every user's battery trades, grid
// purchases and load schedules: the full-information lower bound.

#include <cstddef>
#include <string>
#include <vector>

#include "esscoord/coordinator.hpp"
#include "esscoord/scenario.hpp"
#include "esscoord/selfish.hpp"
#include "esscoord/user_opt.hpp"

namespace esscoord {

struct CooperativeLp {
  lp::LpProblem problem;
  std::vector<std::vector<std::size_t>> charge_vars;     // [m][n]
  std::vector<std::vector<std::size_t>> discharge_vars;  // [m][n]
};

/// Charge and discharge of each user and slot are free in their rate boxes;
/// complementarity is not imposed. SOC rows "soc_low:k"/"soc_high:k" bound
/// every boundary k = 2..N+1; balance rows are "neutrality:m:n".
CooperativeLp build_cooperative_lp(const Scenario& scenario);

struct CooperativeSolution {
  ChargePlan plan;
  std::vector<DispatchSolution> dispatch;
  double total_cost = 0.0;
};

/// Throws ConsistencyError if the optimum charges and discharges the same
/// entry by more than 1e-7 (possible only when prices allow a free round trip).
CooperativeSolution solve_cooperative(const Scenario& scenario, const lp::ToleranceSet& tol = {});

struct ComparisonReport {
  std::vector<std::string> user_names;
  std::vector<double> baseline;
  std::vector<double> selfish;
  std::vector<double> cooperative;
  double baseline_total = 0.0;
  double selfish_total = 0.0;
  double cooperative_total = 0.0;
  bool cooperative_le_selfish = false;  // each with 1e-6 slack
  bool selfish_le_baseline = false;
  bool selfish_each_le_baseline = false;
  /// 1-based users whose cooperative cost exceeds their selfish cost.
  std::vector<std::size_t> cooperative_above_selfish;
  std::size_t selfish_iterations = 0;
  IterationFlag selfish_termination = IterationFlag::converged;
};

ComparisonReport compare_modes(const Scenario& scenario, const CoordinatorParams& params,
                               const lp::ToleranceSet& tol = {});

}  // namespace esscoord
