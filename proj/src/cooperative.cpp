#include "esscoord/cooperative.hpp"

#include <cmath>
#include <sstream>

#include "esscoord/errors.hpp"

namespace esscoord {

CooperativeLp build_cooperative_lp(const Scenario& s) {
  const std::size_t m_users = s.num_users();
  const std::size_t n_slots = s.num_slots();
  const auto& ess = s.ess;
  CooperativeLp out;
  auto& p = out.problem;
  out.charge_vars.assign(m_users, {});
  out.discharge_vars.assign(m_users, {});

  for (std::size_t m = 0; m < m_users; ++m) {
    const auto& user = s.users[m];
    const auto prices = price_row(ess, m);
    for (std::size_t n = 0; n < n_slots; ++n) {
      out.charge_vars[m].push_back(p.add_variable(-prices.sell[n], 0.0, ess.c_max));
      out.discharge_vars[m].push_back(p.add_variable(prices.buy[n], 0.0, ess.d_max));
    }
    std::vector<std::vector<lp::Term>> balance(n_slots);
    for (std::size_t n = 0; n < n_slots; ++n) {
      const auto& segs = user.grid_cost.per_slot[n];
      for (std::size_t k = 0; k < segs.size(); ++k) {
        const double width = k + 1 < segs.size() ? segs[k + 1].breakpoint - segs[k].breakpoint : lp::kInfinity;
        balance[n].push_back({p.add_variable(segs[k].slope, 0.0, width), 1.0});
      }
      balance[n].push_back({out.charge_vars[m][n], -1.0});
      balance[n].push_back({out.discharge_vars[m][n], 1.0});
    }
    for (std::size_t q = 0; q < user.loads.size(); ++q) {
      const auto& load = user.loads[q];
      std::vector<lp::Term> energy;
      for (std::size_t n = 0; n < n_slots; ++n) {
        if (!load.active_at(n)) continue;
        const std::size_t v = p.add_variable(0.0, load.l_min, load.l_max);
        energy.push_back({v, 1.0});
        balance[n].push_back({v, -1.0});
      }
      p.add_equality(std::move(energy), load.energy_total,
                     "energy:" + std::to_string(m + 1) + ":" + std::to_string(q + 1));
    }
    for (std::size_t n = 0; n < n_slots; ++n)
      p.add_greater_equal(std::move(balance[n]), -user.net_energy[n],
                          "neutrality:" + std::to_string(m + 1) + ":" + std::to_string(n + 1));
  }

  std::vector<lp::Term> cumulative;
  for (std::size_t n = 0; n < n_slots; ++n) {
    for (std::size_t m = 0; m < m_users; ++m) {
      cumulative.push_back({out.charge_vars[m][n], ess.eff_charge});
      cumulative.push_back({out.discharge_vars[m][n], -1.0 / ess.eff_discharge});
    }
    p.add_greater_equal(cumulative, ess.s_min - ess.s_initial, "soc_low:" + std::to_string(n + 2));
    std::vector<lp::Term> negated;
    for (const auto& t : cumulative) negated.push_back({t.var, -t.coeff});
    p.add_greater_equal(std::move(negated), ess.s_initial - ess.s_max, "soc_high:" + std::to_string(n + 2));
  }
  return out;
}

CooperativeSolution solve_cooperative(const Scenario& s, const lp::ToleranceSet& tol) {
  const auto built = build_cooperative_lp(s);
  const auto sol = lp::solve(built.problem, tol);
  if (sol.status != lp::LpStatus::optimal)
    throw SolverError(std::string("cooperative LP is ") + lp::to_string(sol.status));

  CooperativeSolution out;
  out.plan = ChargePlan::zero(s.num_users(), s.num_slots());
  for (std::size_t m = 0; m < s.num_users(); ++m) {
    for (std::size_t n = 0; n < s.num_slots(); ++n) {
      const auto mi = static_cast<Eigen::Index>(m);
      const auto ni = static_cast<Eigen::Index>(n);
      auto snap = [](double v) { return std::abs(v) < 1e-12 ? 0.0 : v; };
      const double c = snap(sol.primal[built.charge_vars[m][n]]);
      const double d = snap(sol.primal[built.discharge_vars[m][n]]);
      if (std::abs(c * d) > 1e-7) {
        std::ostringstream msg;
        msg << "cooperative optimum charges and discharges at user " << m + 1 << ", slot " << n + 1 << " (C=" << c
            << ", D=" << d << "); the prices admit a free round trip";
        throw ConsistencyError(msg.str());
      }
      out.plan.charge(mi, ni) = c;
      out.plan.discharge(mi, ni) = d;
    }
  }
  for (std::size_t m = 0; m < s.num_users(); ++m) {
    out.dispatch.push_back(solve_user(s.users[m], price_row(s.ess, m), out.plan.row(m), tol));
    out.total_cost += out.dispatch.back().cost;
  }
  return out;
}

ComparisonReport compare_modes(const Scenario& s, const CoordinatorParams& params, const lp::ToleranceSet& tol) {
  constexpr double kSlack = 1e-6;
  ComparisonReport r;
  for (const auto& u : s.users) r.user_names.push_back(u.name);
  for (const auto& d : baseline_no_ess(s, tol)) r.baseline.push_back(d.cost);
  const auto selfish = run_selfish(s, params, tol);
  for (const auto& d : selfish.dispatch) r.selfish.push_back(d.cost);
  for (const auto& d : solve_cooperative(s, tol).dispatch) r.cooperative.push_back(d.cost);
  r.selfish_iterations = selfish.trace.records.size();
  r.selfish_termination = selfish.trace.termination();

  r.selfish_each_le_baseline = true;
  for (std::size_t m = 0; m < s.num_users(); ++m) {
    r.baseline_total += r.baseline[m];
    r.selfish_total += r.selfish[m];
    r.cooperative_total += r.cooperative[m];
    if (r.selfish[m] > r.baseline[m] + kSlack) r.selfish_each_le_baseline = false;
    if (r.cooperative[m] > r.selfish[m] + kSlack) r.cooperative_above_selfish.push_back(m + 1);
  }
  r.cooperative_le_selfish = r.cooperative_total <= r.selfish_total + kSlack;
  r.selfish_le_baseline = r.selfish_total <= r.baseline_total + kSlack;
  return r;
}

}  // namespace esscoord
