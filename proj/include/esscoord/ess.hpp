#pragma once

// Shared battery description and the controller's charge/discharge plan.
// Users are matrix rows, time slots are columns (0-based in code, 1-based in
// every message and file).

#include <Eigen/Core>

#include <cstddef>
#include <string>
#include <vector>

namespace esscoord {

using Matrix = Eigen::MatrixXd;

struct TimeGrid {
  std::size_t num_slots = 0;  // slot duration is one time unit: power == energy
};

struct SharedEssSpec {
  double s_min = 0.0;
  double s_max = 0.0;
  double s_initial = 0.0;
  double c_max = 0.0;
  double d_max = 0.0;
  double eff_charge = 1.0;
  double eff_discharge = 1.0;
  Matrix sell_price;  // paid to the user per kWh charged into the battery
  Matrix buy_price;   // paid by the user per kWh discharged from the battery

  bool has_capacity() const noexcept { return c_max > 0.0 && d_max > 0.0 && s_max > s_min; }
};

/// One user's slice of a plan (or of a plan increment).
struct PlanRow {
  std::vector<double> charge;
  std::vector<double> discharge;

  static PlanRow zero(std::size_t num_slots);
  std::size_t size() const noexcept { return charge.size(); }
};

/// One user's battery prices over the horizon.
struct PriceRow {
  std::vector<double> sell;
  std::vector<double> buy;
};

struct ChargePlan {
  Matrix charge;     // M x N
  Matrix discharge;  // M x N

  static ChargePlan zero(std::size_t num_users, std::size_t num_slots);

  std::size_t num_users() const noexcept { return static_cast<std::size_t>(charge.rows()); }
  std::size_t num_slots() const noexcept { return static_cast<std::size_t>(charge.cols()); }

  PlanRow row(std::size_t user) const;
  void set_row(std::size_t user, const PlanRow& row);
};

PriceRow price_row(const SharedEssSpec& ess, std::size_t user);

/// S_1 .. S_{N+1} with S_{n+1} = S_n + eff_charge * sum_m C_mn - sum_m D_mn / eff_discharge.
/// Pure evaluation; bounds are not enforced. Throws std::invalid_argument when
/// the plan and the price matrices disagree in shape.
std::vector<double> soc_trajectory(const ChargePlan& plan, const SharedEssSpec& ess);

struct PlanViolation {
  enum class Kind { charge_rate, discharge_rate, complementarity, soc_low, soc_high };
  Kind kind;
  std::size_t user = 0;  // 1-based; 0 for battery-wide violations
  std::size_t slot = 0;  // 1-based slot, or slot boundary for SOC violations
  double value = 0.0;

  std::string describe() const;
};

struct FeasibilityReport {
  bool feasible = true;
  std::vector<PlanViolation> violations;

  explicit operator bool() const noexcept { return feasible; }
};

/// Rate bounds, per-entry complementarity |C*D| <= tol, and every SOC
/// boundary S_1..S_{N+1} inside [s_min - tol, s_max + tol].
FeasibilityReport check_plan_feasible(const ChargePlan& plan, const SharedEssSpec& ess, double tol);

}  // namespace esscoord
