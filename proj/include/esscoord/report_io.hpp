#pragma once

// Runs a mode end to end and turns results into the files the CLI writes.
// Output is deterministic: same inputs, same bytes.

#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "esscoord/cooperative.hpp"

namespace esscoord {

enum class Mode { no_ess, selfish, cooperative };

const char* to_string(Mode mode) noexcept;

struct RunResult {
  Mode mode = Mode::no_ess;
  std::vector<std::string> user_names;
  ChargePlan plan;
  std::vector<DispatchSolution> dispatch;
  std::vector<double> soc;
  double total_cost = 0.0;
  std::optional<IterationTrace> trace;  // selfish mode only
  bool hit_iteration_limit = false;
};

RunResult run_mode(const Scenario& scenario, Mode mode, const CoordinatorParams& params,
                   const lp::ToleranceSet& tol = {});

std::string result_json(const RunResult& result);

/// `iter,user,cost,predicted_drop,realized_drop,rho,flag`, one row per user
/// per iteration.
void write_trace_csv(std::ostream& out, const IterationTrace& trace);

std::string comparison_json(const ComparisonReport& report);

/// The plan matrices of a result document. Throws ParseError.
ChargePlan plan_from_result_json(std::string_view text);

/// Shortest decimal form that reads back to the same double.
std::string format_number(double v);

}  // namespace esscoord
