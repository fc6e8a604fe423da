#include "esscoord/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "esscoord/errors.hpp"

namespace esscoord {

GridCostModel GridCostModel::linear(std::size_t num_slots, double price) {
  return uniform(num_slots, {GridSegment{0.0, price}});
}

GridCostModel GridCostModel::uniform(std::size_t num_slots, std::vector<GridSegment> segments) {
  GridCostModel model;
  model.per_slot.assign(num_slots, segments);
  return model;
}

double GridCostModel::cost(std::size_t slot0, double energy) const {
  const auto& segs = per_slot.at(slot0);
  double total = 0.0;
  for (std::size_t k = 0; k < segs.size(); ++k) {
    const double start = segs[k].breakpoint;
    if (energy <= start) break;
    const double end = k + 1 < segs.size() ? segs[k + 1].breakpoint : energy;
    total += segs[k].slope * (std::min(energy, end) - start);
  }
  return total;
}

namespace {

template <typename... Parts>
std::string cat(const Parts&... parts) {
  std::ostringstream out;
  (out << ... << parts);
  return out.str();
}

bool finite(double v) { return std::isfinite(v); }

void validate_ess(const Scenario& s, std::vector<std::string>& issues) {
  const auto& e = s.ess;
  const double fields[] = {e.s_min, e.s_max, e.s_initial, e.c_max, e.d_max, e.eff_charge, e.eff_discharge};
  if (!std::all_of(std::begin(fields), std::end(fields), finite)) {
    issues.push_back("ess: every battery parameter must be finite");
    return;
  }
  if (e.s_min < 0.0) issues.push_back(cat("ess: s_min must be >= 0 (got ", e.s_min, ")"));
  if (e.s_max < e.s_min) issues.push_back(cat("ess: s_max (", e.s_max, ") must be >= s_min (", e.s_min, ")"));
  if (e.s_initial < e.s_min || e.s_initial > e.s_max)
    issues.push_back(cat("ess: s_initial (", e.s_initial, ") must lie in [s_min, s_max]"));
  if (e.c_max < 0.0) issues.push_back(cat("ess: c_max must be >= 0 (got ", e.c_max, ")"));
  if (e.d_max < 0.0) issues.push_back(cat("ess: d_max must be >= 0 (got ", e.d_max, ")"));
  if (!(e.eff_charge > 0.0 && e.eff_charge < 1.0))
    issues.push_back(cat("ess: eff_charge must lie in (0, 1) (got ", e.eff_charge, ")"));
  if (!(e.eff_discharge > 0.0 && e.eff_discharge < 1.0))
    issues.push_back(cat("ess: eff_discharge must lie in (0, 1) (got ", e.eff_discharge, ")"));

  const auto m = static_cast<Eigen::Index>(s.num_users());
  const auto n = static_cast<Eigen::Index>(s.num_slots());
  const bool sell_ok = e.sell_price.rows() == m && e.sell_price.cols() == n;
  const bool buy_ok = e.buy_price.rows() == m && e.buy_price.cols() == n;
  if (!sell_ok) issues.push_back(cat("ess: sell_price must be ", m, "x", n));
  if (!buy_ok) issues.push_back(cat("ess: buy_price must be ", m, "x", n));
  if (!sell_ok || !buy_ok) return;

  const double round_trip = e.eff_charge * e.eff_discharge;
  for (Eigen::Index u = 0; u < m; ++u) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const double sell = e.sell_price(u, k);
      const double buy = e.buy_price(u, k);
      if (!finite(sell) || sell < 0.0)
        issues.push_back(cat("ess: sell_price at user ", u + 1, ", slot ", k + 1, " must be finite and >= 0"));
      if (!finite(buy) || buy < 0.0)
        issues.push_back(cat("ess: buy_price at user ", u + 1, ", slot ", k + 1, " must be finite and >= 0"));
      // Charging 1 kWh and discharging the round-trip remainder in the same
      // slot leaves the SOC unchanged; it must not earn money.
      if (finite(sell) && finite(buy) && sell > buy * round_trip)
        issues.push_back(cat("ess: arbitrage loop at user ", u + 1, ", slot ", k + 1, ": sell_price ", sell,
                             " exceeds buy_price * eff_charge * eff_discharge = ", buy * round_trip));
    }
  }
}

void validate_grid_cost(const UserProfile& u, std::size_t user, std::size_t n_slots,
                        std::vector<std::string>& issues) {
  if (u.grid_cost.per_slot.size() != n_slots) {
    issues.push_back(cat("user ", user, ": grid cost must define ", n_slots, " slots"));
    return;
  }
  for (std::size_t k = 0; k < n_slots; ++k) {
    const auto& segs = u.grid_cost.per_slot[k];
    const auto where = cat("user ", user, ", slot ", k + 1, ": grid cost ");
    if (segs.empty()) {
      issues.push_back(where + "has no segments");
      continue;
    }
    if (segs.front().breakpoint != 0.0) issues.push_back(where + "must start at breakpoint 0");
    for (std::size_t j = 0; j < segs.size(); ++j) {
      if (!finite(segs[j].breakpoint) || !finite(segs[j].slope)) {
        issues.push_back(cat(where, "segment ", j + 1, " is not finite"));
        continue;
      }
      if (segs[j].slope <= 0.0) issues.push_back(cat(where, "segment ", j + 1, " slope must be > 0"));
      if (j > 0 && segs[j].breakpoint <= segs[j - 1].breakpoint)
        issues.push_back(cat(where, "breakpoints must be strictly increasing at segment ", j + 1));
      if (j > 0 && segs[j].slope < segs[j - 1].slope)
        issues.push_back(cat(where, "slopes must be non-decreasing (convexity) at segment ", j + 1));
    }
  }
}

void validate_load(const ControllableLoad& l, std::size_t user, std::size_t q, std::size_t n_slots,
                   std::vector<std::string>& issues) {
  const auto where = cat("user ", user, ", load ", q, l.name.empty() ? "" : " '" + l.name + "'", ": ");
  if (!finite(l.l_min) || !finite(l.l_max) || !finite(l.energy_total)) {
    issues.push_back(where + "parameters must be finite");
    return;
  }
  bool window_ok = true;
  if (l.start_slot < 1 || l.start_slot >= l.end_slot || l.end_slot > n_slots) {
    issues.push_back(cat(where, "window [", l.start_slot, ", ", l.end_slot, "] must satisfy 1 <= start < end <= ",
                         n_slots));
    window_ok = false;
  }
  if (l.l_min < 0.0 || l.l_min >= l.l_max)
    issues.push_back(cat(where, "rate bounds must satisfy 0 <= l_min < l_max (got ", l.l_min, ", ", l.l_max, ")"));
  if (l.energy_total <= 0.0) issues.push_back(cat(where, "energy must be > 0"));
  if (window_ok) {
    const auto slots = static_cast<double>(l.window_length());
    if (l.energy_total < slots * l.l_min || l.energy_total > slots * l.l_max)
      issues.push_back(cat(where, "not schedulable: energy ", l.energy_total, " outside [", slots * l.l_min, ", ",
                           slots * l.l_max, "] over ", l.window_length(), " slots"));
  }
}

}  // namespace

std::vector<std::string> validate(const Scenario& s) {
  std::vector<std::string> issues;
  if (s.num_slots() < 1) issues.push_back("horizon must have at least one slot");
  if (s.num_users() < 1) issues.push_back("scenario must have at least one user");
  if (!issues.empty()) return issues;

  validate_ess(s, issues);
  for (std::size_t m = 0; m < s.num_users(); ++m) {
    const auto& u = s.users[m];
    const std::size_t user = m + 1;
    if (u.net_energy.size() != s.num_slots()) {
      issues.push_back(cat("user ", user, ": net energy has ", u.net_energy.size(), " entries, expected ",
                           s.num_slots()));
    } else {
      for (std::size_t k = 0; k < u.net_energy.size(); ++k)
        if (!finite(u.net_energy[k])) issues.push_back(cat("user ", user, ": net energy at slot ", k + 1, " is not finite"));
    }
    validate_grid_cost(u, user, s.num_slots(), issues);
    for (std::size_t q = 0; q < u.loads.size(); ++q) validate_load(u.loads[q], user, q + 1, s.num_slots(), issues);
  }
  return issues;
}

void ensure_valid(const Scenario& scenario) {
  auto issues = validate(scenario);
  if (!issues.empty()) throw ValidationError(std::move(issues));
}

Scenario with_capacity(const Scenario& scenario, double s_max) {
  if (!(s_max >= 0.0) || !std::isfinite(s_max)) throw std::invalid_argument("capacity must be finite and >= 0");
  if (!(scenario.ess.s_max > 0.0)) throw std::invalid_argument("cannot rescale a battery with zero capacity");
  Scenario out = scenario;
  const double r = s_max / scenario.ess.s_max;
  out.ess.s_max = s_max;
  out.ess.s_min = scenario.ess.s_min * r;
  out.ess.s_initial = scenario.ess.s_initial * r;
  out.ess.c_max = scenario.ess.c_max * r;
  out.ess.d_max = scenario.ess.d_max * r;
  return out;
}

Scenario with_deadline_extension(const Scenario& scenario, std::size_t extra_slots) {
  Scenario out = scenario;
  for (auto& user : out.users)
    for (auto& load : user.loads) load.end_slot = std::min(load.end_slot + extra_slots, out.num_slots());
  return out;
}

}  // namespace esscoord
