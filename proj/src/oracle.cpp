#include "esscoord/oracle.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace esscoord {

namespace {

std::size_t steps_in(double cap, double step) {
  const double k = cap / step;
  const double r = std::round(k);
  if (std::abs(k - r) > 1e-9 * std::max(1.0, k))
    throw std::invalid_argument("grid step must divide the charge and discharge rate limits");
  return static_cast<std::size_t>(r);
}

}  // namespace

BruteForceResult brute_force_cooperative(const Scenario& s, double grid_step, std::size_t budget,
                                         const lp::ToleranceSet& tol) {
  const std::size_t m_users = s.num_users();
  const std::size_t n_slots = s.num_slots();
  if (m_users * n_slots > 4) throw std::invalid_argument("plan enumeration is limited to M * N <= 4");
  if (!(grid_step > 0.0) || !std::isfinite(grid_step)) throw std::invalid_argument("grid step must be > 0");
  const auto& ess = s.ess;
  const std::size_t kc = steps_in(ess.c_max, grid_step);
  const std::size_t kd = steps_in(ess.d_max, grid_step);
  const std::size_t options = 1 + kc + kd;  // idle, charge levels, discharge levels

  auto entry = [&](std::size_t idx, double& c, double& d) {
    c = d = 0.0;
    if (idx == 0) return;
    if (idx <= kc) c = static_cast<double>(idx) * grid_step;
    else d = static_cast<double>(idx - kc) * grid_step;
  };

  // All plan rows of one user, in mixed-radix order over slots.
  double rows_per_user = std::pow(static_cast<double>(options), static_cast<double>(n_slots));
  if (std::pow(rows_per_user, static_cast<double>(m_users)) > static_cast<double>(budget))
    throw std::length_error("plan enumeration exceeds the budget");
  const auto row_count = static_cast<std::size_t>(rows_per_user);

  auto decode = [&](std::size_t code) {
    PlanRow row = PlanRow::zero(n_slots);
    for (std::size_t n = 0; n < n_slots; ++n) {
      entry(code % options, row.charge[n], row.discharge[n]);
      code /= options;
    }
    return row;
  };

  // Users' costs depend only on their own rows; each is solved the first
  // time it appears in an SOC-feasible plan.
  std::vector<std::vector<double>> cost_table(m_users,
                                              std::vector<double>(row_count, std::numeric_limits<double>::quiet_NaN()));
  auto cost_of = [&](std::size_t m, std::size_t code) {
    double& c = cost_table[m][code];
    if (std::isnan(c)) c = solve_user(s.users[m], price_row(ess, m), decode(code), tol).cost;
    return c;
  };
  std::vector<std::vector<double>> soc_step(row_count, std::vector<double>(n_slots));
  for (std::size_t code = 0; code < row_count; ++code) {
    const PlanRow row = decode(code);
    for (std::size_t n = 0; n < n_slots; ++n)
      soc_step[code][n] = ess.eff_charge * row.charge[n] - row.discharge[n] / ess.eff_discharge;
  }

  BruteForceResult best;
  best.total_cost = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> pick(m_users, 0);
  std::vector<std::size_t> best_pick;
  const double soc_tol = 1e-9;
  while (true) {
    ++best.plans_checked;
    bool feasible = true;
    double soc = ess.s_initial;
    for (std::size_t n = 0; n < n_slots && feasible; ++n) {
      for (std::size_t m = 0; m < m_users; ++m) soc += soc_step[pick[m]][n];
      feasible = soc >= ess.s_min - soc_tol && soc <= ess.s_max + soc_tol;
    }
    if (feasible) {
      ++best.plans_feasible;
      double total = 0.0;
      for (std::size_t m = 0; m < m_users; ++m) total += cost_of(m, pick[m]);
      if (total < best.total_cost) {
        best.total_cost = total;
        best_pick = pick;
      }
    }
    std::size_t m = 0;
    while (m < m_users && ++pick[m] == row_count) pick[m++] = 0;
    if (m == m_users) break;
  }

  best.plan = ChargePlan::zero(m_users, n_slots);
  for (std::size_t m = 0; m < m_users; ++m) best.plan.set_row(m, decode(best_pick[m]));
  return best;
}

std::vector<double> brute_force_value_function(const UserProfile& user, const PriceRow& prices,
                                               const PlanRow& plan, PlanCoordinate which, std::size_t slot,
                                               const std::vector<double>& offsets, const lp::ToleranceSet& tol) {
  if (slot >= plan.size()) throw std::out_of_range("slot outside the horizon");
  std::vector<double> out;
  out.reserve(offsets.size());
  for (double off : offsets) {
    PlanRow probe = plan;
    auto& v = (which == PlanCoordinate::charge ? probe.charge : probe.discharge)[slot];
    v += off;
    if (v < 0.0) throw std::invalid_argument("offset moves the plan entry below zero");
    out.push_back(solve_user(user, prices, probe, tol).cost);
  }
  return out;
}

}  // namespace esscoord
