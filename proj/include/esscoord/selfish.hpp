#pragma once

// Binds scenario users to the coordinator. Each LocalUserAgent owns one
// user's private data and answers only with derivative reports and costs.

#include <vector>

#include "esscoord/coordinator.hpp"
#include "esscoord/scenario.hpp"
#include "esscoord/user_opt.hpp"

namespace esscoord {

class LocalUserAgent final : public UserAgent {
 public:
  LocalUserAgent(UserProfile user, PriceRow prices, lp::ToleranceSet tol = {});

  DerivativeReport report(const PlanRow& plan) override;
  double cost(const PlanRow& plan) override;

 private:
  UserProfile user_;
  PriceRow prices_;
  lp::ToleranceSet tol_;
};

/// Every user's dispatch with the battery left idle.
std::vector<DispatchSolution> baseline_no_ess(const Scenario& scenario, const lp::ToleranceSet& tol = {});

struct SelfishResult {
  ChargePlan plan;
  std::vector<DispatchSolution> dispatch;  // at the final plan
  IterationTrace trace;
  bool hit_iteration_limit = false;

  double total_cost() const;
};

SelfishResult run_selfish(const Scenario& scenario, const CoordinatorParams& params,
                          const lp::ToleranceSet& tol = {});

}  // namespace esscoord
