#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <set>

#include "esscoord/cooperative.hpp"
#include "esscoord/coordinator.hpp"
#include "esscoord/errors.hpp"
#include "esscoord/selfish.hpp"
#include "support.hpp"

using namespace esscoord;
using testsupport::battery;
using testsupport::linear_user;

namespace {

DerivativeReport uniform_report(std::size_t n, SlotDerivatives d) {
  DerivativeReport r;
  r.slots.assign(n, d);
  return r;
}

class CountingAgent final : public UserAgent {
 public:
  explicit CountingAgent(UserAgent& inner) : inner_(inner) {}
  DerivativeReport report(const PlanRow& plan) override {
    auto r = inner_.report(plan);
    scalars += r.scalar_count();
    return r;
  }
  double cost(const PlanRow& plan) override {
    scalars += 1;
    return inner_.cost(plan);
  }
  std::size_t scalars = 0;

 private:
  UserAgent& inner_;
};

}  // namespace

TEST_CASE("default parameters and their guards") {
  const auto ess = battery(1, 2, 20, 200, 20, 30, 0.87, 20, 30);
  const auto p = CoordinatorParams::defaults_for(ess);
  CHECK(p.step_rho == doctest::Approx(0.6));
  CHECK(p.descent_floor == 1e-4);
  CHECK(p.max_iters == 5000);
  CHECK(p.accept_tol == 1e-6);
  CHECK(p.validate(ess).empty());
  auto big = p;
  big.step_rho = 1e9;
  CHECK_FALSE(big.validate(ess).empty());
  auto zero_floor = p;
  zero_floor.descent_floor = 0;
  CHECK_FALSE(zero_floor.validate(ess).empty());
  auto no_iters = p;
  no_iters.max_iters = 0;
  CHECK_FALSE(no_iters.validate(ess).empty());
}

TEST_CASE("flat reports admit no descent") {
  const auto ess = battery(2, 3, 20, 200, 100, 30, 0.87, 20, 30);
  const std::vector<DerivativeReport> reports(2, uniform_report(3, {}));
  const auto p = CoordinatorParams::defaults_for(ess);
  CHECK_FALSE(find_descent_direction(reports, ChargePlan::zero(2, 3), ess, p, p.step_rho).has_value());
}

TEST_CASE("single user discharges by the full step") {
  const auto ess = battery(1, 1, 20, 200, 100, 30, 0.87, 25, 30);
  const std::vector<DerivativeReport> reports{uniform_report(1, {20, 20, -15, -15})};
  const auto p = CoordinatorParams::defaults_for(ess);
  const auto dir = find_descent_direction(reports, ChargePlan::zero(1, 1), ess, p, p.step_rho);
  REQUIRE(dir.has_value());
  CHECK(dir->delta.discharge(0, 0) == doctest::Approx(p.step_rho));
  CHECK(dir->delta.charge(0, 0) == 0);
  CHECK(dir->predicted_drop[0] == doctest::Approx(15 * p.step_rho));
  CHECK(dir->min_drop == doctest::Approx(15 * p.step_rho));
}

TEST_CASE("a shared floor blocks a one-sided gain") {
  // Empty battery: user 1 can only discharge what user 2 charges, and every
  // unit user 2 charges costs more than user 1 can gain.
  const auto ess = battery(2, 1, 20, 200, 20, 30, 0.87, 20, 30);
  std::vector<DerivativeReport> reports{uniform_report(1, {20, 20, -15, -15}),
                                        uniform_report(1, {20, 20, -15, -15})};
  // User 2 prefers charging (right derivatives 5 vs 10) but it still costs.
  reports[1].slots[0] = {5, 5, 10, 10};
  const auto p = CoordinatorParams::defaults_for(ess);
  CHECK_FALSE(find_descent_direction(reports, ChargePlan::zero(2, 1), ess, p, p.step_rho).has_value());

  // If user 2 gains from charging, both can move together.
  reports[1].slots[0] = {-5, -5, 10, 10};
  const auto dir = find_descent_direction(reports, ChargePlan::zero(2, 1), ess, p, p.step_rho);
  REQUIRE(dir.has_value());
  CHECK(dir->delta.charge(1, 0) > 0);
  CHECK(dir->delta.discharge(0, 0) > 0);
  CHECK(dir->delta.discharge(0, 0) <= 0.87 * 0.87 * dir->delta.charge(1, 0) + 1e-12);
}

TEST_CASE("mode restriction keeps entries complementary") {
  const auto ess = battery(1, 2, 20, 200, 100, 30, 0.87, 20, 30);
  ChargePlan plan = ChargePlan::zero(1, 2);
  plan.charge(0, 0) = 0.3;
  plan.discharge(0, 1) = 29.9;
  // Strong pull towards discharging at slot 1 and charging at slot 2.
  const std::vector<DerivativeReport> reports{uniform_report(2, {40, 40, -40, -40})};
  auto r = reports;
  r[0].slots[1] = {-40, -40, 40, 40};
  const auto p = CoordinatorParams::defaults_for(ess);
  const auto dir = find_descent_direction(r, plan, ess, p, p.step_rho);
  REQUIRE(dir.has_value());
  CHECK(dir->delta.discharge(0, 0) == 0);  // slot 1 is charging: only C may move
  CHECK(dir->delta.charge(0, 0) == doctest::Approx(-0.3));
  CHECK(dir->delta.charge(0, 1) == 0);
  CHECK(dir->delta.discharge(0, 1) == doctest::Approx(-0.6));
}

TEST_CASE("an idle entry may move either way, and is netted back to one mode") {
  // Full battery. Slot 1 is exactly balanced, so charging there looks cheaper
  // than discharging, but only discharging makes room for selling the slot-2
  // surplus into the battery.
  Scenario s;
  s.grid.num_slots = 2;
  s.ess = battery(1, 2, 0, 100, 100, 10, 0.87, 0, 0);
  s.ess.sell_price << 15, 30;
  s.ess.buy_price << 35, 40;
  s.users.push_back(linear_user({0.0, 10.0}));
  ensure_valid(s);
  LocalUserAgent agent(s.users[0], price_row(s.ess, 0));
  const auto rep = agent.report(PlanRow::zero(2));
  CHECK(rep.slots[0].charge_right < rep.slots[0].discharge_right);
  const auto p = CoordinatorParams::defaults_for(s.ess);
  const auto dir = find_descent_direction({rep}, ChargePlan::zero(1, 2), s.ess, p, p.step_rho);
  REQUIRE(dir.has_value());
  CHECK(dir->delta.charge(0, 0) == 0);
  CHECK(dir->delta.discharge(0, 0) > 0);
  CHECK(dir->delta.charge(0, 1) > 0);

  // Both raising moves on one idle entry collapse to the one with the same
  // SOC effect.
  const auto flat = battery(1, 1, 0, 100, 50, 10, 0.5, 0, 0);
  const std::vector<DerivativeReport> both{uniform_report(1, {-1, -1, -1, -1})};
  const auto d2 = find_descent_direction(both, ChargePlan::zero(1, 1), flat, p, 1.0);
  REQUIRE(d2.has_value());
  CHECK(d2->delta.charge(0, 0) * d2->delta.discharge(0, 0) == 0);

  const auto r = run_selfish(s, p);
  CHECK(r.total_cost() < baseline_no_ess(s)[0].cost - 1);
}

TEST_CASE("nothing to gain: stops at once on the zero plan") {
  Scenario s;
  s.grid.num_slots = 3;
  s.ess = battery(2, 3, 20, 200, 20, 30, 0.87, 0, 30);
  s.users.push_back(linear_user({1, 2, 3}));
  s.users.push_back(linear_user({0, 5, 0}));
  const auto r = run_selfish(s, CoordinatorParams::defaults_for(s.ess));
  REQUIRE(r.trace.records.size() == 1);
  CHECK(r.trace.termination() == IterationFlag::converged);
  CHECK(r.plan.charge.isZero(0));
  CHECK(r.plan.discharge.isZero(0));
  CHECK(r.total_cost() == 0);
}

TEST_CASE("store the surplus, use it in the deficit") {
  Scenario s;
  s.grid.num_slots = 2;
  s.ess = battery(1, 2, 20, 200, 20, 30, 0.87, 20, 30);
  s.users.push_back(linear_user({20, -20}));
  const auto base = baseline_no_ess(s);
  CHECK(base[0].cost == doctest::Approx(900));
  const auto r = run_selfish(s, CoordinatorParams::defaults_for(s.ess));
  CHECK(r.plan.charge(0, 0) > 1);
  CHECK(r.plan.discharge(0, 1) > 1);
  CHECK(r.total_cost() < 900);
  const auto coop = solve_cooperative(s);
  CHECK(coop.total_cost <= r.total_cost() + 1e-6);
  CHECK(r.total_cost() <= coop.total_cost * (1 + 1e-3));
}

TEST_CASE("zero-capacity battery leaves the baseline") {
  Scenario s;
  s.grid.num_slots = 2;
  s.ess = battery(1, 2, 0, 0, 0, 0, 0.87, 20, 30);
  s.users.push_back(linear_user({20, -20}));
  const auto r = run_selfish(s, CoordinatorParams::defaults_for(s.ess));
  CHECK(r.trace.termination() == IterationFlag::no_capacity);
  CHECK(r.total_cost() == doctest::Approx(baseline_no_ess(s)[0].cost).epsilon(1e-12));
}

TEST_CASE("iteration limit is reported") {
  Scenario s;
  s.grid.num_slots = 2;
  s.ess = battery(1, 2, 20, 200, 20, 30, 0.87, 20, 30);
  s.users.push_back(linear_user({20, -20}));
  auto p = CoordinatorParams::defaults_for(s.ess);
  p.max_iters = 3;
  const auto r = run_selfish(s, p);
  CHECK(r.hit_iteration_limit);
  CHECK(r.trace.termination() == IterationFlag::max_iters);
  CHECK(r.total_cost() < 900);
}

TEST_CASE("bad parameters are a validation error") {
  Scenario s;
  s.grid.num_slots = 1;
  s.ess = battery(1, 1, 20, 200, 20, 30, 0.87, 20, 30);
  s.users.push_back(linear_user({-1}));
  auto p = CoordinatorParams::defaults_for(s.ess);
  p.step_rho = 1e9;
  CHECK_THROWS_AS(run_selfish(s, p), ValidationError);
}

TEST_CASE("every accepted step helps every user and keeps the plan feasible") {
  std::mt19937_64 rng(71);
  for (int t = 0; t < 4; ++t) {
    const auto s = testsupport::random_day(rng, 3, 24);
    const auto r = run_selfish(s, CoordinatorParams::defaults_for(s.ess));
    CHECK_FALSE(r.hit_iteration_limit);
    auto prev = r.trace.initial_costs;
    for (const auto& rec : r.trace.records) {
      if (rec.flag == IterationFlag::accepted)
        for (std::size_t m = 0; m < 3; ++m) CHECK(rec.costs[m] < prev[m] - 1e-6);
      else
        CHECK(rec.costs == prev);
      prev = rec.costs;
      CHECK(check_plan_feasible(rec.plan, s.ess, 1e-9).feasible);
      CHECK((rec.plan.charge.array() * rec.plan.discharge.array()).isZero(0));
      CHECK(rec.plan.charge.minCoeff() >= 0);
      CHECK(rec.plan.charge.maxCoeff() <= s.ess.c_max);
      CHECK(rec.plan.discharge.minCoeff() >= 0);
      CHECK(rec.plan.discharge.maxCoeff() <= s.ess.d_max);
    }
    const auto base = baseline_no_ess(s);
    for (std::size_t m = 0; m < 3; ++m) CHECK(r.dispatch[m].cost <= base[m].cost + 1e-6);
  }
}

TEST_CASE("message volume per iteration") {
  std::mt19937_64 rng(83);
  const auto s = testsupport::random_day(rng, 3, 24);
  std::vector<std::unique_ptr<LocalUserAgent>> locals;
  std::vector<std::unique_ptr<CountingAgent>> counters;
  std::vector<UserAgent*> agents;
  for (std::size_t m = 0; m < 3; ++m) {
    locals.push_back(std::make_unique<LocalUserAgent>(s.users[m], price_row(s.ess, m)));
    counters.push_back(std::make_unique<CountingAgent>(*locals.back()));
    agents.push_back(counters.back().get());
  }
  const auto r = coordinate(s.ess, agents, CoordinatorParams::defaults_for(s.ess));
  const std::size_t full = 4 * 3 * 24 + 3;
  std::size_t sum = 3;  // initial costs at the zero plan
  for (const auto& rec : r.trace.records) {
    if (rec.flag == IterationFlag::converged) CHECK(rec.scalars_received == 4 * 3 * 24);
    else CHECK(rec.scalars_received == full);
    sum += rec.scalars_received;
  }
  std::size_t counted = 0;
  for (const auto& c : counters) counted += c->scalars;
  CHECK(counted == sum);
}

TEST_CASE("coordinator sources see only the agent interface") {
  const std::filesystem::path root = ESSCOORD_SOURCE_DIR;
  const std::set<std::string> allowed = {"esscoord/agent.hpp", "esscoord/coordinator.hpp", "esscoord/ess.hpp",
                                         "esscoord/lp.hpp", "esscoord/errors.hpp"};
  const std::regex include_line(R"(^\s*#\s*include\s*"([^"]+)\")");
  for (const auto& file : {root / "include/esscoord/coordinator.hpp", root / "src/coordinator.cpp",
                           root / "include/esscoord/agent.hpp", root / "include/esscoord/ess.hpp",
                           root / "include/esscoord/lp.hpp"}) {
    std::ifstream in(file);
    REQUIRE(in);
    std::string line;
    while (std::getline(in, line)) {
      std::smatch m;
      if (std::regex_search(line, m, include_line)) {
        INFO(file.string() << " includes " << m[1]);
        CHECK(allowed.count(m[1]) == 1);
      }
    }
  }
}
