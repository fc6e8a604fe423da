#pragma once

// Shared fixtures for the test binaries: hand-sized instances, seeded random
// scenario generators and an LP answer computed by brute-force vertex
// enumeration.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "esscoord/lp.hpp"
#include "esscoord/scenario.hpp"

namespace testsupport {

using esscoord::ControllableLoad;
using esscoord::GridCostModel;
using esscoord::GridSegment;
using esscoord::Matrix;
using esscoord::Scenario;
using esscoord::SharedEssSpec;
using esscoord::UserProfile;

inline SharedEssSpec battery(std::size_t m, std::size_t n, double s_min, double s_max, double s_initial,
                             double rate, double eff, double sell, double buy) {
  SharedEssSpec e;
  e.s_min = s_min;
  e.s_max = s_max;
  e.s_initial = s_initial;
  e.c_max = rate;
  e.d_max = rate;
  e.eff_charge = eff;
  e.eff_discharge = eff;
  e.sell_price = Matrix::Constant(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n), sell);
  e.buy_price = Matrix::Constant(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n), buy);
  return e;
}

inline UserProfile linear_user(std::vector<double> net, double price = 45.0, std::string name = "u") {
  UserProfile u;
  u.name = std::move(name);
  u.grid_cost = GridCostModel::linear(net.size(), price);
  u.net_energy = std::move(net);
  return u;
}

/// One user, one slot, deficit 10, grid at 45, battery prices 20/30 and
/// plenty of stored energy.
inline Scenario t1() {
  Scenario s;
  s.grid.num_slots = 1;
  s.ess = battery(1, 1, 20, 200, 100, 30, 0.87, 20, 30);
  s.users.push_back(linear_user({-10.0}));
  return s;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int integer(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

/// Tiny instance whose data sit on a coarse dyadic grid so the joint optimum
/// is reachable by plan enumeration: efficiencies 1/2, integer energies and
/// prices.
inline Scenario random_tiny(std::mt19937_64& rng, std::size_t m, std::size_t n, double rate) {
  Scenario s;
  s.grid.num_slots = n;
  const double s_min = integer(rng, 0, 1);
  const double s_max = s_min + integer(rng, 1, 3);
  s.ess = battery(m, n, s_min, s_max, integer(rng, static_cast<int>(s_min), static_cast<int>(s_max)), rate, 0.5,
                  0, 0);
  for (std::size_t u = 0; u < m; ++u) {
    UserProfile p;
    p.name = "u" + std::to_string(u + 1);
    for (std::size_t k = 0; k < n; ++k) p.net_energy.push_back(integer(rng, -4, 3));
    if (integer(rng, 0, 1) == 0)
      p.grid_cost = GridCostModel::linear(n, integer(rng, 30, 50));
    else
      p.grid_cost = GridCostModel::uniform(n, {GridSegment{0, static_cast<double>(integer(rng, 20, 35))},
                                               GridSegment{static_cast<double>(integer(rng, 1, 3)),
                                                           static_cast<double>(integer(rng, 40, 60))}});
    if (n >= 2 && integer(rng, 0, 1) == 0) {
      ControllableLoad l;
      l.name = "load";
      l.start_slot = 1;
      l.end_slot = n;
      l.l_min = 0;
      l.l_max = integer(rng, 1, 3);
      l.energy_total = integer(rng, 1, static_cast<int>(n * l.l_max));
      p.loads.push_back(l);
    }
    s.users.push_back(std::move(p));
  }
  for (std::size_t u = 0; u < m; ++u)
    for (std::size_t k = 0; k < n; ++k) {
      const auto ui = static_cast<Eigen::Index>(u);
      const auto ki = static_cast<Eigen::Index>(k);
      const double buy = integer(rng, 12, 40);
      s.ess.buy_price(ui, ki) = buy;
      s.ess.sell_price(ui, ki) = integer(rng, 0, static_cast<int>(std::floor(buy * 0.25)));
    }
  return s;
}

/// Day-shaped random instance at the scale of the bundled example.
inline Scenario random_day(std::mt19937_64& rng, std::size_t m, std::size_t n = 24) {
  Scenario s;
  s.grid.num_slots = n;
  const double s_max = uniform(rng, 80, 250);
  const double eff = uniform(rng, 0.8, 0.95);
  s.ess = battery(m, n, 0.1 * s_max, s_max, 0.1 * s_max + uniform(rng, 0, 0.3) * s_max, 0.15 * s_max, eff, 0, 0);
  const double hours = static_cast<double>(n);
  for (std::size_t u = 0; u < m; ++u) {
    UserProfile p;
    p.name = "u" + std::to_string(u + 1);
    const double solar = uniform(rng, 0, 90);
    const double base = uniform(rng, 10, 35);
    const double evening = uniform(rng, 0, 30);
    const double shift = uniform(rng, -2, 2);
    for (std::size_t k = 0; k < n; ++k) {
      const double h = 24.0 * static_cast<double>(k) / hours;
      const double sun = (h > 6 && h < 19) ? solar * std::sin(M_PI * (h - 6) / 13) : 0.0;
      const double load = base + evening * std::exp(-std::pow((h - 19 - shift) / 2.5, 2));
      p.net_energy.push_back(std::round((sun - load + uniform(rng, -3, 3)) * 100) / 100);
    }
    const double price = uniform(rng, 35, 55);
    if (integer(rng, 0, 2) == 0)
      p.grid_cost = GridCostModel::uniform(n, {GridSegment{0, price}, GridSegment{uniform(rng, 20, 60), price * 1.5}});
    else
      p.grid_cost = GridCostModel::linear(n, price);
    const int loads = integer(rng, 0, 2);
    for (int q = 0; q < loads; ++q) {
      ControllableLoad l;
      l.name = "load" + std::to_string(q + 1);
      l.start_slot = static_cast<std::size_t>(integer(rng, 1, static_cast<int>(n) - 4));
      l.end_slot = std::min(n, l.start_slot + static_cast<std::size_t>(integer(rng, 3, 12)));
      l.l_min = uniform(rng, 0, 10);
      l.l_max = l.l_min + uniform(rng, 5, 40);
      const double slots = static_cast<double>(l.window_length());
      l.energy_total = slots * (l.l_min + uniform(rng, 0.1, 0.9) * (l.l_max - l.l_min));
      p.loads.push_back(l);
    }
    s.users.push_back(std::move(p));
  }
  for (std::size_t u = 0; u < m; ++u)
    for (std::size_t k = 0; k < n; ++k) {
      const auto ui = static_cast<Eigen::Index>(u);
      const auto ki = static_cast<Eigen::Index>(k);
      const double buy = uniform(rng, 20, 40);
      s.ess.buy_price(ui, ki) = buy;
      s.ess.sell_price(ui, ki) = uniform(rng, 0.3, 0.95) * buy * eff * eff;
    }
  return s;
}

// ---- LP by vertex enumeration ------------------------------------------------

struct VertexAnswer {
  bool feasible = false;
  double objective = std::numeric_limits<double>::infinity();
  std::vector<double> x;
};

/// Minimum over all basic feasible points of a problem with finite bounds.
/// Exponential; meant for a handful of variables and rows.
inline VertexAnswer enumerate_vertices(const esscoord::lp::LpProblem& p, double tol = 1e-9) {
  const std::size_t n = p.num_variables();
  std::vector<std::vector<double>> rows;  // dense: a_i
  std::vector<double> rhs;
  std::vector<bool> is_eq;
  for (const auto* set : {&p.equalities, &p.inequalities})
    for (const auto& r : *set) {
      std::vector<double> a(n, 0.0);
      for (const auto& t : r.terms) a[t.var] += t.coeff;
      rows.push_back(a);
      rhs.push_back(r.rhs);
      is_eq.push_back(set == &p.equalities);
    }
  // Candidate active constraints: every row, and each variable at either bound.
  struct Active {
    std::vector<double> a;
    double b;
  };
  std::vector<Active> pool;
  for (std::size_t i = 0; i < rows.size(); ++i) pool.push_back({rows[i], rhs[i]});
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> e(n, 0.0);
    e[j] = 1.0;
    pool.push_back({e, p.lower[j]});
    pool.push_back({e, p.upper[j]});
  }
  VertexAnswer best;
  std::vector<std::size_t> pick(n);
  const std::size_t k = pool.size();
  // Iterate over all n-subsets of the pool.
  for (std::size_t i = 0; i < n; ++i) pick[i] = i;
  while (true) {
    Eigen::MatrixXd a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    Eigen::VectorXd b(static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = pool[pick[r]].a[c];
      b(static_cast<Eigen::Index>(r)) = pool[pick[r]].b;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (lu.isInvertible()) {
      const Eigen::VectorXd x = lu.solve(b);
      bool ok = true;
      for (std::size_t j = 0; j < n && ok; ++j)
        ok = x(static_cast<Eigen::Index>(j)) >= p.lower[j] - tol && x(static_cast<Eigen::Index>(j)) <= p.upper[j] + tol;
      for (std::size_t i = 0; i < rows.size() && ok; ++i) {
        double act = 0.0;
        for (std::size_t j = 0; j < n; ++j) act += rows[i][j] * x(static_cast<Eigen::Index>(j));
        ok = is_eq[i] ? std::abs(act - rhs[i]) <= tol : act >= rhs[i] - tol;
      }
      if (ok) {
        double obj = 0.0;
        for (std::size_t j = 0; j < n; ++j) obj += p.objective[j] * x(static_cast<Eigen::Index>(j));
        best.feasible = true;
        if (obj < best.objective) {
          best.objective = obj;
          best.x.assign(x.data(), x.data() + n);
        }
      }
    }
    std::size_t i = n;
    while (i > 0 && pick[i - 1] == k - n + (i - 1)) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < n; ++j) pick[j] = pick[j - 1] + 1;
  }
  return best;
}

/// Independent optimality certificate check: primal feasibility, dual sign,
/// complementary slackness and a zero duality gap for the bounded form.
inline std::string certificate_problems(const esscoord::lp::LpProblem& p, const esscoord::lp::LpSolution& s,
                                        double feas = 1e-9, double cs = 1e-8, double gap = 1e-8) {
  std::string out;
  const std::size_t n = p.num_variables();
  const auto y = s.duals();
  std::vector<double> d = p.objective;  // c - A'y
  std::size_t row = 0;
  for (const auto* set : {&p.equalities, &p.inequalities}) {
    for (const auto& r : *set) {
      double act = 0.0;
      for (const auto& t : r.terms) {
        act += t.coeff * s.primal[t.var];
        d[t.var] -= t.coeff * y[row];
      }
      const double slack = act - r.rhs;
      if (set == &p.equalities) {
        if (std::abs(slack) > feas * std::max(1.0, std::abs(r.rhs))) out += "equality residual; ";
      } else {
        if (slack < -feas * std::max(1.0, std::abs(r.rhs))) out += "inequality violated; ";
        if (y[row] < -cs) out += "negative multiplier; ";
        if (std::abs(y[row] * slack) > cs * std::max(1.0, std::abs(y[row]))) out += "row slackness; ";
      }
      ++row;
    }
  }
  double primal = 0.0;
  double dual = 0.0;
  row = 0;
  for (const auto* set : {&p.equalities, &p.inequalities})
    for (const auto& r : *set) dual += r.rhs * y[row++];
  for (std::size_t j = 0; j < n; ++j) {
    primal += p.objective[j] * s.primal[j];
    if (s.primal[j] < p.lower[j] - feas || s.primal[j] > p.upper[j] + feas) out += "bound violated; ";
    const double scale = std::max(1.0, std::abs(p.objective[j]));
    if (d[j] > cs * scale) {
      if (std::abs(s.primal[j] - p.lower[j]) > feas * std::max(1.0, std::abs(p.lower[j]))) out += "column slackness; ";
      dual += d[j] * p.lower[j];
    } else if (d[j] < -cs * scale) {
      if (std::abs(s.primal[j] - p.upper[j]) > feas * std::max(1.0, std::abs(p.upper[j]))) out += "column slackness; ";
      dual += d[j] * p.upper[j];
    } else {
      dual += d[j] * s.primal[j];
    }
  }
  if (std::abs(primal - dual) > gap * std::max(1.0, std::abs(primal))) out += "duality gap; ";
  return out;
}

}  // namespace testsupport
