#pragma once

// Reference answers for tests, computed without the coordinator or the joint
// LP: plan enumeration on tiny instances and direct value-function probing.

#include <cstddef>
#include <vector>

#include "esscoord/scenario.hpp"
#include "esscoord/user_opt.hpp"

namespace esscoord {

struct BruteForceResult {
  ChargePlan plan;
  double total_cost = 0.0;
  std::size_t plans_checked = 0;   // complementary plans enumerated
  std::size_t plans_feasible = 0;  // of which SOC-feasible
};

/// Every complementary plan whose entries lie on {0, step, 2 step, ...}
/// within the rate limits; the cheapest SOC-feasible one wins. Requires
/// M * N <= 4 and `grid_step` dividing c_max and d_max. Throws
/// std::invalid_argument on a broken precondition and std::length_error when
/// more than `budget` plans would be enumerated.
BruteForceResult brute_force_cooperative(const Scenario& scenario, double grid_step,
                                         std::size_t budget = 5'000'000, const lp::ToleranceSet& tol = {});

enum class PlanCoordinate { charge, discharge };

/// The user's optimal cost with one plan entry moved by each offset in turn.
std::vector<double> brute_force_value_function(const UserProfile& user, const PriceRow& prices,
                                               const PlanRow& plan, PlanCoordinate which, std::size_t slot,
                                               const std::vector<double>& offsets,
                                               const lp::ToleranceSet& tol = {});

}  // namespace esscoord
