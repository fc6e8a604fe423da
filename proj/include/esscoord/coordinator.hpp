#pragma once

// The self-interested coordination loop. It sees users only through
// UserAgent: derivative reports and realized costs. Nothing here knows about
// net-energy profiles, loads or grid tariffs.

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "esscoord/agent.hpp"
#include "esscoord/ess.hpp"
#include "esscoord/lp.hpp"

namespace esscoord {

struct CoordinatorParams {
  double step_rho = 0.0;  // largest change of any plan entry per iteration
  double descent_floor = 1e-4;
  std::size_t max_iters = 5000;
  double accept_tol = 1e-6;

  /// step_rho = 0.02 * min(c_max, d_max).
  static CoordinatorParams defaults_for(const SharedEssSpec& ess);

  /// Empty when usable with `ess`. The step bound is only checked against a
  /// battery that can actually trade.
  std::vector<std::string> validate(const SharedEssSpec& ess) const;
};

struct DescentDirection {
  ChargePlan delta;
  std::vector<double> predicted_drop;  // per user, from the first-order estimate
  double min_drop = 0.0;               // the optimized common decrease t
};

/// Largest common first-order decrease reachable by one step of at most `rho`
/// per entry that keeps the plan within rates, complementary and inside the
/// SOC band at every slot boundary. Returns nothing when that decrease is
/// below params.descent_floor.
std::optional<DescentDirection> find_descent_direction(const std::vector<DerivativeReport>& reports,
                                                       const ChargePlan& plan, const SharedEssSpec& ess,
                                                       const CoordinatorParams& params, double rho,
                                                       const lp::ToleranceSet& tol = {});

enum class IterationFlag { accepted, rejected, converged, rho_floor, max_iters, no_capacity };

const char* to_string(IterationFlag flag) noexcept;

struct IterationRecord {
  std::size_t iter = 0;
  double rho = 0.0;
  IterationFlag flag = IterationFlag::converged;
  std::vector<double> costs;  // realized costs at the plan held after this iteration
  std::vector<double> predicted_drop;
  std::vector<double> realized_drop;  // zero unless a trial step was evaluated
  double step_norm = 0.0;             // max |entry| of the tried increment
  std::vector<double> soc;            // trajectory of the plan held after this iteration
  ChargePlan plan;
  std::size_t scalars_received = 0;  // report and cost scalars collected this iteration
};

struct IterationTrace {
  std::vector<double> initial_costs;
  std::vector<IterationRecord> records;

  IterationFlag termination() const;
};

struct CoordinationResult {
  ChargePlan plan;
  std::vector<double> costs;
  IterationTrace trace;
  bool hit_iteration_limit = false;
};

/// Starts from the zero plan. Each iteration asks every agent for a report,
/// searches a direction, evaluates the trial plan and keeps it only if every
/// user's realized cost drops by more than accept_tol; otherwise the step
/// bound is halved, down to 1e-3 of its initial value. After an accepted
/// step the bound grows back by a factor of two, capped at its initial value.
/// Throws ValidationError for unusable parameters.
CoordinationResult coordinate(const SharedEssSpec& ess, const std::vector<UserAgent*>& agents,
                              const CoordinatorParams& params, const lp::ToleranceSet& tol = {});

}  // namespace esscoord
