#pragma once

// What crosses the user -> controller boundary. The controller sees each
// user only through this interface: four one-sided partial derivatives per
// slot, and the scalar cost of a proposed plan row.

#include <cstddef>
#include <vector>

#include "esscoord/ess.hpp"

namespace esscoord {

/// One-sided partial derivatives of a user's optimal cost with respect to its
/// own charge and discharge at one slot (currency per kWh).
struct SlotDerivatives {
  double charge_right = 0.0;
  double charge_left = 0.0;
  double discharge_right = 0.0;
  double discharge_left = 0.0;
};

struct DerivativeReport {
  static constexpr std::size_t kScalarsPerSlot = 4;

  std::vector<SlotDerivatives> slots;

  std::size_t scalar_count() const noexcept { return kScalarsPerSlot * slots.size(); }
};

/// First-order cost change for a plan increment, using the right derivative
/// for increases and the left derivative for decreases of each entry.
double cost_delta_estimate(const DerivativeReport& report, const PlanRow& delta);

class UserAgent {
 public:
  virtual ~UserAgent() = default;

  /// Derivatives of this user's optimal cost at its plan row.
  virtual DerivativeReport report(const PlanRow& plan) = 0;

  /// This user's optimal cost when its battery trades are fixed to `plan`.
  virtual double cost(const PlanRow& plan) = 0;
};

}  // namespace esscoord
