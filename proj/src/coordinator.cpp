#include "esscoord/coordinator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "esscoord/errors.hpp"

namespace esscoord {

CoordinatorParams CoordinatorParams::defaults_for(const SharedEssSpec& ess) {
  CoordinatorParams p;
  p.step_rho = 0.02 * std::min(ess.c_max, ess.d_max);
  return p;
}

std::vector<std::string> CoordinatorParams::validate(const SharedEssSpec& ess) const {
  std::vector<std::string> issues;
  auto add = [&](const std::string& what, double v) {
    std::ostringstream out;
    out << what << " (got " << v << ")";
    issues.push_back(out.str());
  };
  if (!std::isfinite(step_rho) || step_rho < 0.0) add("step_rho must be finite and >= 0", step_rho);
  if (ess.has_capacity()) {
    const double cap = std::min(ess.c_max, ess.d_max);
    if (!(step_rho > 0.0)) add("step_rho must be > 0", step_rho);
    if (step_rho > cap) add("step_rho must not exceed min(c_max, d_max) = " + std::to_string(cap), step_rho);
  }
  if (!std::isfinite(descent_floor) || !(descent_floor > 0.0)) add("descent_floor must be > 0", descent_floor);
  if (max_iters < 1) issues.push_back("max_iters must be >= 1");
  if (!std::isfinite(accept_tol) || accept_tol < 0.0) add("accept_tol must be finite and >= 0", accept_tol);
  return issues;
}

const char* to_string(IterationFlag flag) noexcept {
  switch (flag) {
    case IterationFlag::accepted: return "accepted";
    case IterationFlag::rejected: return "rejected";
    case IterationFlag::converged: return "converged";
    case IterationFlag::rho_floor: return "rho_floor";
    case IterationFlag::max_iters: return "max_iters";
    case IterationFlag::no_capacity: return "no_capacity";
  }
  return "unknown";
}

IterationFlag IterationTrace::termination() const {
  return records.empty() ? IterationFlag::converged : records.back().flag;
}

namespace {

// Variables of the direction LP for one plan entry; any may be absent. An
// idle entry gets both raising moves, netted after the solve.
struct EntryVars {
  std::ptrdiff_t charge_up = -1;
  std::ptrdiff_t charge_down = -1;
  std::ptrdiff_t discharge_up = -1;
  std::ptrdiff_t discharge_down = -1;
};

double value_of(const lp::LpSolution& sol, std::ptrdiff_t var) {
  return var >= 0 ? sol.primal[static_cast<std::size_t>(var)] : 0.0;
}

}  // namespace

std::optional<DescentDirection> find_descent_direction(const std::vector<DerivativeReport>& reports,
                                                       const ChargePlan& plan, const SharedEssSpec& ess,
                                                       const CoordinatorParams& params, double rho,
                                                       const lp::ToleranceSet& tol) {
  const std::size_t m_users = plan.num_users();
  const std::size_t n_slots = plan.num_slots();
  if (reports.size() != m_users) throw std::invalid_argument("one derivative report per user is required");
  for (const auto& r : reports)
    if (r.slots.size() != n_slots) throw std::invalid_argument("derivative report length does not match the plan");

  lp::LpProblem p;
  std::vector<EntryVars> vars(m_users * n_slots);
  auto at = [&](std::size_t m, std::size_t n) -> EntryVars& { return vars[m * n_slots + n]; };

  for (std::size_t m = 0; m < m_users; ++m) {
    for (std::size_t n = 0; n < n_slots; ++n) {
      const auto mi = static_cast<Eigen::Index>(m);
      const auto ni = static_cast<Eigen::Index>(n);
      const double c = plan.charge(mi, ni);
      const double d = plan.discharge(mi, ni);
      auto& e = at(m, n);
      auto add = [&](double room) {
        return room > 0.0 ? static_cast<std::ptrdiff_t>(p.add_variable(0.0, 0.0, room)) : std::ptrdiff_t{-1};
      };
      if (c > 0.0) {
        e.charge_up = add(std::min(rho, ess.c_max - c));
        e.charge_down = add(std::min(rho, c));
      } else if (d > 0.0) {
        e.discharge_up = add(std::min(rho, ess.d_max - d));
        e.discharge_down = add(std::min(rho, d));
      } else {
        e.charge_up = add(std::min(rho, ess.c_max));
        e.discharge_up = add(std::min(rho, ess.d_max));
      }
    }
  }
  const std::size_t t_var = p.add_variable(-1.0, -lp::kInfinity, lp::kInfinity);

  // SOC after boundary k, relative to the current plan, stays in the band.
  // Right-hand sides are clipped so the zero step is always admissible.
  const auto soc = soc_trajectory(plan, ess);
  std::vector<lp::Term> cumulative;
  for (std::size_t n = 0; n < n_slots; ++n) {
    for (std::size_t m = 0; m < m_users; ++m) {
      const auto& e = at(m, n);
      const double wc = ess.eff_charge;
      const double wd = -1.0 / ess.eff_discharge;
      if (e.charge_up >= 0) cumulative.push_back({static_cast<std::size_t>(e.charge_up), wc});
      if (e.charge_down >= 0) cumulative.push_back({static_cast<std::size_t>(e.charge_down), -wc});
      if (e.discharge_up >= 0) cumulative.push_back({static_cast<std::size_t>(e.discharge_up), wd});
      if (e.discharge_down >= 0) cumulative.push_back({static_cast<std::size_t>(e.discharge_down), -wd});
    }
    const double s = soc[n + 1];
    p.add_greater_equal(cumulative, std::min(ess.s_min - s, 0.0), "soc_low:" + std::to_string(n + 2));
    std::vector<lp::Term> negated;
    negated.reserve(cumulative.size());
    for (const auto& t : cumulative) negated.push_back({t.var, -t.coeff});
    p.add_greater_equal(std::move(negated), std::min(s - ess.s_max, 0.0), "soc_high:" + std::to_string(n + 2));
  }

  // estimate_m + t <= 0, written as -estimate_m - t >= 0.
  for (std::size_t m = 0; m < m_users; ++m) {
    std::vector<lp::Term> row;
    for (std::size_t n = 0; n < n_slots; ++n) {
      const auto& e = at(m, n);
      const auto& s = reports[m].slots[n];
      if (e.charge_up >= 0) row.push_back({static_cast<std::size_t>(e.charge_up), -s.charge_right});
      if (e.charge_down >= 0) row.push_back({static_cast<std::size_t>(e.charge_down), s.charge_left});
      if (e.discharge_up >= 0) row.push_back({static_cast<std::size_t>(e.discharge_up), -s.discharge_right});
      if (e.discharge_down >= 0) row.push_back({static_cast<std::size_t>(e.discharge_down), s.discharge_left});
    }
    row.push_back({t_var, -1.0});
    p.add_greater_equal(std::move(row), 0.0, "descent:" + std::to_string(m + 1));
  }

  const auto sol = lp::solve(p, tol);
  if (sol.status != lp::LpStatus::optimal)
    throw SolverError(std::string("direction search LP is ") + lp::to_string(sol.status));
  const double t = sol.primal[t_var];
  if (!(t >= params.descent_floor)) return std::nullopt;

  DescentDirection dir;
  dir.delta = ChargePlan::zero(m_users, n_slots);
  dir.min_drop = t;
  dir.predicted_drop.assign(m_users, 0.0);
  for (std::size_t m = 0; m < m_users; ++m) {
    PlanRow row = PlanRow::zero(n_slots);
    for (std::size_t n = 0; n < n_slots; ++n) {
      const auto& e = at(m, n);
      double dc = value_of(sol, e.charge_up) - value_of(sol, e.charge_down);
      double dd = value_of(sol, e.discharge_up) - value_of(sol, e.discharge_down);
      if (dc > 0.0 && dd > 0.0) {
        // Same SOC effect from one move alone; under the no-arbitrage price
        // guard this never raises the user's first-order cost.
        const double stored = ess.eff_charge * dc - dd / ess.eff_discharge;
        dc = stored > 0.0 ? stored / ess.eff_charge : 0.0;
        dd = stored > 0.0 ? 0.0 : -stored * ess.eff_discharge;
      }
      row.charge[n] = dc;
      row.discharge[n] = dd;
    }
    dir.predicted_drop[m] = -cost_delta_estimate(reports[m], row);
    dir.delta.set_row(m, row);
  }
  return dir;
}

namespace {

// plan + delta, with round-off residue removed so that entries that should be
// exactly zero (or exactly at a rate limit) are.
ChargePlan apply_step(const ChargePlan& plan, const ChargePlan& delta, const SharedEssSpec& ess) {
  constexpr double kSnap = 1e-12;
  ChargePlan out = plan;
  out.charge += delta.charge;
  out.discharge += delta.discharge;
  auto clean = [](Matrix& a, double cap) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      double& v = a.data()[i];
      if (std::abs(v) < kSnap) v = 0.0;
      if (std::abs(v - cap) < kSnap) v = cap;
      v = std::clamp(v, 0.0, cap);
    }
  };
  clean(out.charge, ess.c_max);
  clean(out.discharge, ess.d_max);
  return out;
}

double max_abs(const ChargePlan& p) {
  return std::max(p.charge.size() ? p.charge.cwiseAbs().maxCoeff() : 0.0,
                  p.discharge.size() ? p.discharge.cwiseAbs().maxCoeff() : 0.0);
}

}  // namespace

CoordinationResult coordinate(const SharedEssSpec& ess, const std::vector<UserAgent*>& agents,
                              const CoordinatorParams& params, const lp::ToleranceSet& tol) {
  if (auto issues = params.validate(ess); !issues.empty()) throw ValidationError(std::move(issues));
  const std::size_t m_users = agents.size();
  const auto n_slots = static_cast<std::size_t>(ess.sell_price.cols());
  if (static_cast<std::size_t>(ess.sell_price.rows()) != m_users)
    throw std::invalid_argument("price matrices must have one row per agent");

  CoordinationResult result;
  result.plan = ChargePlan::zero(m_users, n_slots);
  for (auto* a : agents) result.costs.push_back(a->cost(PlanRow::zero(n_slots)));
  result.trace.initial_costs = result.costs;
  const auto soc_now = [&] { return soc_trajectory(result.plan, ess); };

  if (!ess.has_capacity()) {
    IterationRecord r;
    r.iter = 1;
    r.flag = IterationFlag::no_capacity;
    r.costs = result.costs;
    r.predicted_drop.assign(m_users, 0.0);
    r.realized_drop.assign(m_users, 0.0);
    r.soc = soc_now();
    r.plan = result.plan;
    result.trace.records.push_back(std::move(r));
    return result;
  }

  const double rho_max = params.step_rho;
  const double rho_min = 1e-3 * rho_max;
  double rho = rho_max;

  for (std::size_t iter = 1;; ++iter) {
    IterationRecord r;
    r.iter = iter;
    r.rho = rho;
    r.predicted_drop.assign(m_users, 0.0);
    r.realized_drop.assign(m_users, 0.0);

    if (iter > params.max_iters) {
      r.flag = IterationFlag::max_iters;
      r.costs = result.costs;
      r.soc = soc_now();
      r.plan = result.plan;
      result.trace.records.push_back(std::move(r));
      result.hit_iteration_limit = true;
      break;
    }

    std::vector<DerivativeReport> reports;
    reports.reserve(m_users);
    for (std::size_t m = 0; m < m_users; ++m) {
      reports.push_back(agents[m]->report(result.plan.row(m)));
      r.scalars_received += reports.back().scalar_count();
    }

    const auto dir = find_descent_direction(reports, result.plan, ess, params, rho, tol);
    if (!dir) {
      r.flag = IterationFlag::converged;
      r.costs = result.costs;
      r.soc = soc_now();
      r.plan = result.plan;
      result.trace.records.push_back(std::move(r));
      break;
    }

    r.predicted_drop = dir->predicted_drop;
    r.step_norm = max_abs(dir->delta);
    const ChargePlan trial = apply_step(result.plan, dir->delta, ess);
    std::vector<double> trial_costs;
    bool improves_all = true;
    for (std::size_t m = 0; m < m_users; ++m) {
      trial_costs.push_back(agents[m]->cost(trial.row(m)));
      r.scalars_received += 1;
      r.realized_drop[m] = result.costs[m] - trial_costs[m];
      if (!(r.realized_drop[m] > params.accept_tol)) improves_all = false;
    }

    if (improves_all) {
      result.plan = trial;
      result.costs = trial_costs;
      r.flag = IterationFlag::accepted;
      rho = std::min(2.0 * rho, rho_max);
    } else {
      rho *= 0.5;
      r.flag = rho < rho_min ? IterationFlag::rho_floor : IterationFlag::rejected;
    }
    r.costs = result.costs;
    r.soc = soc_now();
    r.plan = result.plan;
    const bool stop = r.flag == IterationFlag::rho_floor;
    result.trace.records.push_back(std::move(r));
    if (stop) break;
  }
  return result;
}

}  // namespace esscoord
