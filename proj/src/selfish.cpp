#include "esscoord/selfish.hpp"

#include <memory>
#include <utility>

namespace esscoord {

LocalUserAgent::LocalUserAgent(UserProfile user, PriceRow prices, lp::ToleranceSet tol)
    : user_(std::move(user)), prices_(std::move(prices)), tol_(tol) {}

DerivativeReport LocalUserAgent::report(const PlanRow& plan) {
  return derivative_report(user_, prices_, plan, tol_);
}

double LocalUserAgent::cost(const PlanRow& plan) { return solve_user(user_, prices_, plan, tol_).cost; }

std::vector<DispatchSolution> baseline_no_ess(const Scenario& scenario, const lp::ToleranceSet& tol) {
  std::vector<DispatchSolution> out;
  const auto zero = PlanRow::zero(scenario.num_slots());
  for (std::size_t m = 0; m < scenario.num_users(); ++m)
    out.push_back(solve_user(scenario.users[m], price_row(scenario.ess, m), zero, tol));
  return out;
}

double SelfishResult::total_cost() const {
  double total = 0.0;
  for (const auto& d : dispatch) total += d.cost;
  return total;
}

SelfishResult run_selfish(const Scenario& scenario, const CoordinatorParams& params, const lp::ToleranceSet& tol) {
  std::vector<std::unique_ptr<LocalUserAgent>> owned;
  std::vector<UserAgent*> agents;
  for (std::size_t m = 0; m < scenario.num_users(); ++m) {
    owned.push_back(std::make_unique<LocalUserAgent>(scenario.users[m], price_row(scenario.ess, m), tol));
    agents.push_back(owned.back().get());
  }
  auto coord = coordinate(scenario.ess, agents, params, tol);

  SelfishResult out;
  out.plan = std::move(coord.plan);
  out.trace = std::move(coord.trace);
  out.hit_iteration_limit = coord.hit_iteration_limit;
  for (std::size_t m = 0; m < scenario.num_users(); ++m)
    out.dispatch.push_back(solve_user(scenario.users[m], price_row(scenario.ess, m), out.plan.row(m), tol));
  return out;
}

}  // namespace esscoord
