#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "esscoord/cooperative.hpp"
#include "esscoord/oracle.hpp"
#include "support.hpp"

using namespace esscoord;
using testsupport::battery;
using testsupport::linear_user;

TEST_CASE("coarsest grid on one entry has three plans") {
  const auto r = brute_force_cooperative(testsupport::t1(), 30);
  CHECK(r.plans_checked == 3);
}

TEST_CASE("stored energy found by enumeration") {
  const auto s = testsupport::t1();
  const auto r = brute_force_cooperative(s, 1);
  CHECK(r.total_cost == doctest::Approx(300).epsilon(1e-12));
  CHECK(r.plan.discharge(0, 0) == 10);
  CHECK(std::abs(r.total_cost - solve_cooperative(s).total_cost) <= 1e-6);
}

TEST_CASE("zero capacity enumerates only the idle plan") {
  Scenario s;
  s.grid.num_slots = 2;
  s.ess = battery(2, 2, 0, 0, 0, 0, 0.87, 20, 30);
  s.users.push_back(linear_user({-1, 2}));
  s.users.push_back(linear_user({-3, -1}));
  const auto r = brute_force_cooperative(s, 0.5);
  CHECK(r.plans_checked == 1);
  double base = 0;
  for (const auto& d : baseline_no_ess(s)) base += d.cost;
  CHECK(r.total_cost == doctest::Approx(base));
}

TEST_CASE("preconditions") {
  auto s = testsupport::t1();
  CHECK_THROWS_AS(brute_force_cooperative(s, 7), std::invalid_argument);
  CHECK_THROWS_AS(brute_force_cooperative(s, 0), std::invalid_argument);
  CHECK_THROWS_AS(brute_force_cooperative(s, 1e-3, 1000), std::length_error);
  Scenario big;
  big.grid.num_slots = 5;
  big.ess = battery(1, 5, 0, 10, 0, 1, 0.5, 0, 0);
  big.users.push_back(linear_user({0, 0, 0, 0, 0}));
  CHECK_THROWS_AS(brute_force_cooperative(big, 1), std::invalid_argument);
}

TEST_CASE("value function probes") {
  const auto u = linear_user({-10});
  const PriceRow p{{25}, {30}};
  const auto zero = PlanRow::zero(1);
  const auto at0 = brute_force_value_function(u, p, zero, PlanCoordinate::discharge, 0, {0.0});
  REQUIRE(at0.size() == 1);
  CHECK(at0[0] == solve_user(u, p, zero).cost);

  const auto f = brute_force_value_function(u, p, zero, PlanCoordinate::discharge, 0, {0.0, 0.1});
  CHECK((f[1] - f[0]) / 0.1 == doctest::Approx(-15).epsilon(1e-10));

  // At D = 10 the balance is met exactly; the two sides differ.
  const PlanRow kink{{0}, {10}};
  const auto k = brute_force_value_function(u, p, kink, PlanCoordinate::discharge, 0, {-0.1, 0.0, 0.1});
  const double left = (k[1] - k[0]) / 0.1, right = (k[2] - k[1]) / 0.1;
  CHECK(left == doctest::Approx(-15));
  CHECK(right == doctest::Approx(30));
  const auto rep = derivative_report(u, p, kink);
  CHECK(rep.slots[0].discharge_left == doctest::Approx(left));
  CHECK(rep.slots[0].discharge_right == doctest::Approx(right));
  CHECK_THROWS_AS(brute_force_value_function(u, p, zero, PlanCoordinate::charge, 0, {-1.0}), std::invalid_argument);
}

TEST_CASE("enumeration never beats the joint LP") {
  std::mt19937_64 rng(113);
  for (int t = 0; t < 10; ++t) {
    const auto s = testsupport::random_tiny(rng, 1 + t % 2, 1 + (t / 2) % 2, 1);
    const double lp = solve_cooperative(s).total_cost;
    const double coarse = brute_force_cooperative(s, 0.5).total_cost;
    const double fine = brute_force_cooperative(s, 0.25).total_cost;
    CHECK(coarse >= lp - 1e-6);
    CHECK(fine >= lp - 1e-6);
    CHECK(fine <= coarse + 1e-9);
  }
}
