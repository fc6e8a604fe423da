#include "esscoord/user_opt.hpp"

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>

#include "esscoord/errors.hpp"

namespace esscoord {

double cost_delta_estimate(const DerivativeReport& report, const PlanRow& delta) {
  if (delta.charge.size() != report.slots.size() || delta.discharge.size() != report.slots.size())
    throw std::invalid_argument("increment length does not match the derivative report");
  double total = 0.0;
  for (std::size_t n = 0; n < report.slots.size(); ++n) {
    const auto& s = report.slots[n];
    const double dc = delta.charge[n];
    const double dd = delta.discharge[n];
    total += s.charge_right * std::max(dc, 0.0) - s.charge_left * std::max(-dc, 0.0);
    total += s.discharge_right * std::max(dd, 0.0) - s.discharge_left * std::max(-dd, 0.0);
  }
  return total;
}

UserLp build_user_lp(const UserProfile& user, const PriceRow& prices, const PlanRow& plan) {
  const std::size_t n_slots = user.net_energy.size();
  if (plan.charge.size() != n_slots || plan.discharge.size() != n_slots || prices.sell.size() != n_slots ||
      prices.buy.size() != n_slots || user.grid_cost.per_slot.size() != n_slots)
    throw std::invalid_argument("user data, prices and plan row disagree on the horizon length");

  UserLp out;
  auto& p = out.problem;

  out.grid_vars.resize(n_slots);
  for (std::size_t n = 0; n < n_slots; ++n) {
    const auto& segs = user.grid_cost.per_slot[n];
    for (std::size_t k = 0; k < segs.size(); ++k) {
      const double width = k + 1 < segs.size() ? segs[k + 1].breakpoint - segs[k].breakpoint : lp::kInfinity;
      out.grid_vars[n].push_back(p.add_variable(segs[k].slope, 0.0, width));
    }
  }

  out.load_vars.assign(user.loads.size(), std::vector<std::ptrdiff_t>(n_slots, -1));
  for (std::size_t q = 0; q < user.loads.size(); ++q) {
    const auto& load = user.loads[q];
    std::vector<lp::Term> energy_row;
    for (std::size_t n = 0; n < n_slots; ++n) {
      if (!load.active_at(n)) continue;
      const std::size_t v = p.add_variable(0.0, load.l_min, load.l_max);
      out.load_vars[q][n] = static_cast<std::ptrdiff_t>(v);
      energy_row.push_back({v, 1.0});
    }
    p.add_equality(std::move(energy_row), load.energy_total, "energy:" + std::to_string(q + 1));
  }

  for (std::size_t n = 0; n < n_slots; ++n) {
    std::vector<lp::Term> terms;
    for (std::size_t v : out.grid_vars[n]) terms.push_back({v, 1.0});
    for (const auto& per_load : out.load_vars)
      if (per_load[n] >= 0) terms.push_back({static_cast<std::size_t>(per_load[n]), -1.0});
    const double rhs = plan.charge[n] - plan.discharge[n] - user.net_energy[n];
    out.neutrality_rows.push_back(p.add_greater_equal(std::move(terms), rhs, "neutrality:" + std::to_string(n + 1)));
    out.constant += -prices.sell[n] * plan.charge[n] + prices.buy[n] * plan.discharge[n];
  }
  return out;
}

namespace {

DispatchSolution extract(const UserLp& ulp, const lp::LpSolution& sol) {
  const std::size_t n_slots = ulp.grid_vars.size();
  DispatchSolution d;
  d.grid_energy.assign(n_slots, 0.0);
  for (std::size_t n = 0; n < n_slots; ++n)
    for (std::size_t v : ulp.grid_vars[n]) d.grid_energy[n] += sol.primal[v];
  d.load_alloc.assign(ulp.load_vars.size(), std::vector<double>(n_slots, 0.0));
  for (std::size_t q = 0; q < ulp.load_vars.size(); ++q)
    for (std::size_t n = 0; n < n_slots; ++n)
      if (ulp.load_vars[q][n] >= 0) d.load_alloc[q][n] = sol.primal[static_cast<std::size_t>(ulp.load_vars[q][n])];
  d.cost = sol.objective_value + ulp.constant;
  const auto duals = sol.duals();
  for (std::size_t row : ulp.neutrality_rows) d.duals.push_back(duals[row]);
  return d;
}

lp::LpSolution solve_checked(const UserLp& ulp, const lp::ToleranceSet& tol) {
  auto sol = lp::solve(ulp.problem, tol);
  if (sol.status != lp::LpStatus::optimal)
    throw InfeasibleDispatchError(std::string("user dispatch LP is ") + lp::to_string(sol.status));
  return sol;
}

DerivativeReport report_from(const UserLp& ulp, const lp::LpSolution& sol, const PriceRow& prices,
                             const lp::ToleranceSet& tol) {
  const std::size_t n_slots = ulp.neutrality_rows.size();
  const auto duals = sol.duals();
  // A nondegenerate optimal basis has a unique dual; only probe otherwise.
  std::optional<lp::DualFace> face;
  if (sol.degenerate) face.emplace(ulp.problem, sol, tol);

  DerivativeReport r;
  r.slots.resize(n_slots);
  for (std::size_t n = 0; n < n_slots; ++n) {
    const std::size_t row = ulp.neutrality_rows[n];
    double lo = duals[row];
    double hi = duals[row];
    if (face) {
      lo = face->extreme_of_row(row, lp::Sense::minimize);
      hi = face->extreme_of_row(row, lp::Sense::maximize);
    }
    auto& s = r.slots[n];
    s.charge_right = -prices.sell[n] + hi;
    s.charge_left = -prices.sell[n] + lo;
    s.discharge_right = prices.buy[n] - lo;
    s.discharge_left = prices.buy[n] - hi;
  }
  return r;
}

}  // namespace

DispatchSolution solve_user(const UserProfile& user, const PriceRow& prices, const PlanRow& plan,
                            const lp::ToleranceSet& tol) {
  const UserLp ulp = build_user_lp(user, prices, plan);
  return extract(ulp, solve_checked(ulp, tol));
}

DerivativeReport derivative_report(const UserProfile& user, const PriceRow& prices, const PlanRow& plan,
                                   const lp::ToleranceSet& tol) {
  return evaluate_user(user, prices, plan, tol).second;
}

std::pair<DispatchSolution, DerivativeReport> evaluate_user(const UserProfile& user, const PriceRow& prices,
                                                            const PlanRow& plan, const lp::ToleranceSet& tol) {
  const UserLp ulp = build_user_lp(user, prices, plan);
  const auto sol = solve_checked(ulp, tol);
  return {extract(ulp, sol), report_from(ulp, sol, prices, tol)};
}

}  // namespace esscoord
