#include "esscoord/ess.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace esscoord {

PlanRow PlanRow::zero(std::size_t num_slots) {
  return PlanRow{std::vector<double>(num_slots, 0.0), std::vector<double>(num_slots, 0.0)};
}

ChargePlan ChargePlan::zero(std::size_t num_users, std::size_t num_slots) {
  const auto m = static_cast<Eigen::Index>(num_users);
  const auto n = static_cast<Eigen::Index>(num_slots);
  return ChargePlan{Matrix::Zero(m, n), Matrix::Zero(m, n)};
}

PlanRow ChargePlan::row(std::size_t user) const {
  PlanRow out = PlanRow::zero(num_slots());
  for (std::size_t n = 0; n < num_slots(); ++n) {
    out.charge[n] = charge(user, n);
    out.discharge[n] = discharge(user, n);
  }
  return out;
}

void ChargePlan::set_row(std::size_t user, const PlanRow& row) {
  if (row.charge.size() != num_slots() || row.discharge.size() != num_slots())
    throw std::invalid_argument("plan row length does not match the horizon");
  for (std::size_t n = 0; n < num_slots(); ++n) {
    charge(user, n) = row.charge[n];
    discharge(user, n) = row.discharge[n];
  }
}

PriceRow price_row(const SharedEssSpec& ess, std::size_t user) {
  const auto n = static_cast<std::size_t>(ess.sell_price.cols());
  PriceRow out{std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.sell[k] = ess.sell_price(user, k);
    out.buy[k] = ess.buy_price(user, k);
  }
  return out;
}

std::vector<double> soc_trajectory(const ChargePlan& plan, const SharedEssSpec& ess) {
  if (plan.charge.rows() != plan.discharge.rows() || plan.charge.cols() != plan.discharge.cols() ||
      plan.charge.rows() != ess.sell_price.rows() || plan.charge.cols() != ess.sell_price.cols())
    throw std::invalid_argument("plan dimensions do not match the battery price matrices");
  const std::size_t n_slots = plan.num_slots();
  std::vector<double> soc(n_slots + 1);
  soc[0] = ess.s_initial;
  for (std::size_t n = 0; n < n_slots; ++n) {
    soc[n + 1] = soc[n] + ess.eff_charge * plan.charge.col(n).sum() - plan.discharge.col(n).sum() / ess.eff_discharge;
  }
  return soc;
}

std::string PlanViolation::describe() const {
  std::ostringstream out;
  switch (kind) {
    case Kind::charge_rate:
      out << "charge of user " << user << " at slot " << slot << " outside [0, c_max]: " << value;
      break;
    case Kind::discharge_rate:
      out << "discharge of user " << user << " at slot " << slot << " outside [0, d_max]: " << value;
      break;
    case Kind::complementarity:
      out << "user " << user << " charges and discharges at slot " << slot << " (C*D = " << value << ")";
      break;
    case Kind::soc_low:
      out << "state of charge below s_min at boundary " << slot << ": " << value;
      break;
    case Kind::soc_high:
      out << "state of charge above s_max at boundary " << slot << ": " << value;
      break;
  }
  return out.str();
}

FeasibilityReport check_plan_feasible(const ChargePlan& plan, const SharedEssSpec& ess, double tol) {
  FeasibilityReport report;
  auto add = [&report](PlanViolation v) {
    report.feasible = false;
    report.violations.push_back(v);
  };
  for (std::size_t m = 0; m < plan.num_users(); ++m) {
    for (std::size_t n = 0; n < plan.num_slots(); ++n) {
      const double c = plan.charge(m, n);
      const double d = plan.discharge(m, n);
      if (!(c >= -tol && c <= ess.c_max + tol)) add({PlanViolation::Kind::charge_rate, m + 1, n + 1, c});
      if (!(d >= -tol && d <= ess.d_max + tol)) add({PlanViolation::Kind::discharge_rate, m + 1, n + 1, d});
      if (!(std::abs(c * d) <= tol)) add({PlanViolation::Kind::complementarity, m + 1, n + 1, c * d});
    }
  }
  const auto soc = soc_trajectory(plan, ess);
  for (std::size_t k = 0; k < soc.size(); ++k) {
    if (!(soc[k] >= ess.s_min - tol)) add({PlanViolation::Kind::soc_low, 0, k + 1, soc[k]});
    if (!(soc[k] <= ess.s_max + tol)) add({PlanViolation::Kind::soc_high, 0, k + 1, soc[k]});
  }
  return report;
}

}  // namespace esscoord
