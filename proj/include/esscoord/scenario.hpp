#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "esscoord/ess.hpp"

namespace esscoord {

/// Deferrable task: `energy_total` must be delivered inside the inclusive
/// window [start_slot, end_slot] (1-based) at a per-slot rate in [l_min, l_max].
struct ControllableLoad {
  std::string name;
  std::size_t start_slot = 1;
  std::size_t end_slot = 1;
  double l_min = 0.0;
  double l_max = 0.0;
  double energy_total = 0.0;

  std::size_t window_length() const noexcept { return end_slot - start_slot + 1; }
  bool active_at(std::size_t slot0) const noexcept { return slot0 + 1 >= start_slot && slot0 + 1 <= end_slot; }
};

/// Segment k has slope `slope` from `breakpoint` up to the next breakpoint.
struct GridSegment {
  double breakpoint = 0.0;
  double slope = 0.0;
};

/// Convex, increasing, piecewise-linear purchase cost per slot, f(0) = 0.
struct GridCostModel {
  std::vector<std::vector<GridSegment>> per_slot;

  static GridCostModel linear(std::size_t num_slots, double price);
  static GridCostModel uniform(std::size_t num_slots, std::vector<GridSegment> segments);

  double cost(std::size_t slot0, double energy) const;
};

struct UserProfile {
  std::string name;
  std::vector<double> net_energy;  // renewable generation minus fixed load, per slot
  std::vector<ControllableLoad> loads;
  GridCostModel grid_cost;
};

struct Scenario {
  TimeGrid grid;
  SharedEssSpec ess;
  std::vector<UserProfile> users;

  std::size_t num_users() const noexcept { return users.size(); }
  std::size_t num_slots() const noexcept { return grid.num_slots; }
};

/// Every violated invariant, with 1-based indices. Empty when valid.
std::vector<std::string> validate(const Scenario& scenario);

/// Throws ValidationError listing every issue found by validate().
void ensure_valid(const Scenario& scenario);

/// Reads the scenario document and the CSVs it references (paths relative
/// to the document). Throws ParseError or ValidationError.
Scenario load_scenario(const std::filesystem::path& path);

/// Same as load_scenario for an in-memory document.
Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir = {});

/// Reads a `slot,net_kwh` CSV with slots 1..N in order.
std::vector<double> read_net_energy_csv(const std::filesystem::path& path);

/// Rescales the battery to a new s_max, keeping the ratios of s_min, s_initial,
/// c_max and d_max to s_max. s_max == 0 yields a battery with no capacity.
Scenario with_capacity(const Scenario& scenario, double s_max);

/// Extends every controllable load's end slot by `extra_slots`, clamped to N.
Scenario with_deadline_extension(const Scenario& scenario, std::size_t extra_slots);

}  // namespace esscoord
