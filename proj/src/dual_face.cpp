#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "esscoord/errors.hpp"
#include "esscoord/lp.hpp"

namespace esscoord::lp {

namespace {

bool near(double value, double bound, double tol) {
  return std::isfinite(bound) && std::abs(value - bound) <= tol * std::max(1.0, std::abs(bound));
}

}  // namespace

// A dual vector y is optimal iff it is dual feasible and complementary to one
// primal optimum x*. For each primal column j with reduced cost
// d_j = c_j - A_j'y:
//   x*_j strictly inside its bounds  ->  d_j == 0
//   x*_j on its lower bound          ->  d_j >= 0
//   x*_j on its upper bound          ->  d_j <= 0
//   fixed column                     ->  unrestricted
// and for every inequality row: y_i >= 0, with y_i == 0 when the row is slack.
DualFace::DualFace(const LpProblem& problem, const LpSolution& base, const ToleranceSet& tol) : tol_(tol) {
  if (base.status != LpStatus::optimal)
    throw std::invalid_argument("dual face requires an optimal base solution");
  const std::size_t ne = problem.equalities.size();
  const std::size_t ni = problem.inequalities.size();
  const std::size_t m = ne + ni;
  const std::size_t n = problem.num_variables();
  const auto& x = base.primal;

  fixed_zero_.assign(m, false);
  for (std::size_t i = 0; i < ne; ++i) face_.add_variable(0.0, -kInfinity, kInfinity);
  for (std::size_t k = 0; k < ni; ++k) {
    const auto& row = problem.inequalities[k];
    double activity = 0.0;
    for (const auto& t : row.terms) activity += t.coeff * x[t.var];
    const bool binding = activity - row.rhs <= tol.feas * std::max(1.0, std::abs(row.rhs));
    fixed_zero_[ne + k] = !binding;
    face_.add_variable(0.0, 0.0, binding ? kInfinity : 0.0);
  }

  // Column-wise view of the constraint matrix.
  std::vector<std::vector<Term>> columns(n);
  for (std::size_t i = 0; i < ne; ++i)
    for (const auto& t : problem.equalities[i].terms) columns[t.var].push_back({i, t.coeff});
  for (std::size_t k = 0; k < ni; ++k)
    for (const auto& t : problem.inequalities[k].terms) columns[t.var].push_back({ne + k, t.coeff});

  for (std::size_t j = 0; j < n; ++j) {
    const double lo = problem.lower[j];
    const double hi = problem.upper[j];
    if (lo == hi) continue;
    const bool at_lower = near(x[j], lo, tol.feas);
    const bool at_upper = near(x[j], hi, tol.feas);
    if (at_lower && at_upper) continue;
    const double c = problem.objective[j];
    const std::string label = "col:" + std::to_string(j);
    if (at_lower) {
      // A_j'y <= c_j
      std::vector<Term> neg;
      neg.reserve(columns[j].size());
      for (const auto& t : columns[j]) neg.push_back({t.var, -t.coeff});
      face_.add_greater_equal(std::move(neg), -c, label);
    } else if (at_upper) {
      face_.add_greater_equal(columns[j], c, label);
    } else {
      face_.add_equality(columns[j], c, label);
    }
  }
}

double DualFace::extreme(std::span<const double> probe, Sense sense) const {
  if (probe.size() != face_.num_variables())
    throw std::invalid_argument("probe length does not match the number of rows");
  LpProblem problem = face_;
  const double sign = sense == Sense::minimize ? 1.0 : -1.0;
  for (std::size_t i = 0; i < probe.size(); ++i) problem.objective[i] = sign * probe[i];
  const LpSolution sol = solve(problem, tol_);
  switch (sol.status) {
    case LpStatus::optimal: return sign * sol.objective_value;
    case LpStatus::unbounded: return sense == Sense::minimize ? -kInfinity : kInfinity;
    case LpStatus::infeasible: break;
  }
  throw SolverError("optimal dual face is empty; primal solution is inconsistent with its own certificate");
}

double DualFace::extreme_of_row(std::size_t row, Sense sense) const {
  if (row >= fixed_zero_.size()) throw std::out_of_range("row index out of range");
  if (fixed_zero_[row]) return 0.0;
  std::vector<double> probe(face_.num_variables(), 0.0);
  probe[row] = 1.0;
  return extreme(probe, sense);
}

double solve_restricted_to_optimal_face(const LpProblem& problem, const LpSolution& base,
                                        std::span<const double> probe, Sense sense, const ToleranceSet& tol) {
  return DualFace(problem, base, tol).extreme(probe, sense);
}

}  // namespace esscoord::lp
