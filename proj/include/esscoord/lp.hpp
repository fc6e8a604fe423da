#pragma once

// Dense bounded-variable simplex for the small LPs that make up the dispatch,
// cooperative and direction-search problems.
//
// Canonical form:
//   minimize    c'x
//   subject to  a_i'x == b_i   (equalities)
//               a_i'x >= b_i   (inequalities)
//               lower <= x <= upper   (either side may be infinite)

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace esscoord::lp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct ToleranceSet {
  double feas = 1e-9;  // absolute, on row residuals and bounds
  double gap = 1e-8;   // relative, primal vs dual objective
  double cs = 1e-8;    // multiplier * slack

  /// Defaults overridden by ESSCOORD_TOL_FEAS / _GAP / _CS when set.
  static ToleranceSet from_env();
};

struct Term {
  std::size_t var;
  double coeff;
};

struct Constraint {
  std::vector<Term> terms;
  double rhs = 0.0;
  std::string label;
};

struct LpProblem {
  std::vector<double> objective;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<Constraint> equalities;
  std::vector<Constraint> inequalities;  // terms . x >= rhs

  std::size_t add_variable(double cost, double lo, double hi);
  std::size_t add_equality(std::vector<Term> terms, double rhs, std::string label = {});
  std::size_t add_greater_equal(std::vector<Term> terms, double rhs, std::string label = {});

  std::size_t num_variables() const noexcept { return objective.size(); }
  std::size_t num_rows() const noexcept { return equalities.size() + inequalities.size(); }

  /// Row position in the combined (equalities, then inequalities) ordering.
  std::optional<std::size_t> find_row(const std::string& label) const;

  /// Throws std::invalid_argument on non-finite data or bad indices.
  void check() const;
};

enum class LpStatus { optimal, infeasible, unbounded };

const char* to_string(LpStatus status) noexcept;

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  std::vector<double> primal;
  double objective_value = 0.0;
  std::vector<double> duals_eq;
  std::vector<double> duals_ineq;  // >= 0 at optimality
  std::vector<double> reduced_costs;
  /// Phase-one multipliers (equalities, then inequalities) when infeasible:
  /// a Farkas-style certificate.
  std::vector<double> farkas;
  /// True when some basic variable sits on a bound, i.e. the dual optimum
  /// may not be unique.
  bool degenerate = false;
  std::size_t iterations = 0;

  /// Duals in the combined (equalities, then inequalities) ordering.
  std::vector<double> duals() const;
};

/// Deterministic: identical problems give bit-identical results.
/// Throws SolverError on numerical breakdown or iteration limit.
LpSolution solve(const LpProblem& problem, const ToleranceSet& tol = {});

/// Optimal solves in this process that passed the feasibility, slackness and
/// duality-gap checks.
std::size_t certified_solve_count() noexcept;

enum class Sense { minimize, maximize };

/// The set of optimal dual solutions of a solved problem, described by
/// complementary slackness against the reported primal optimum. Extremes of
/// linear functionals over this set are one-sided sensitivities of the
/// optimal value with respect to the right-hand sides.
class DualFace {
 public:
  DualFace(const LpProblem& problem, const LpSolution& base, const ToleranceSet& tol = {});

  /// Extreme of probe . y over the optimal dual set; probe is indexed in the
  /// combined row ordering. Returns +/-infinity if the face is unbounded in
  /// that direction.
  double extreme(std::span<const double> probe, Sense sense) const;

  /// Convenience for a single multiplier.
  double extreme_of_row(std::size_t row, Sense sense) const;

  /// True when complementary slackness alone pins this multiplier to zero.
  bool row_is_slack(std::size_t row) const { return fixed_zero_[row]; }

 private:
  LpProblem face_;  // variables = multipliers; constraints from the primal optimum
  std::vector<bool> fixed_zero_;
  ToleranceSet tol_;
};

/// Free-function form of DualFace::extreme.
double solve_restricted_to_optimal_face(const LpProblem& problem, const LpSolution& base,
                                        std::span<const double> probe, Sense sense,
                                        const ToleranceSet& tol = {});

/// Plain-text dump for cross-checking with third-party solvers:
///   VARS <n>
///   OBJ c_0 ... c_{n-1}
///   BOUND <j> <lo> <hi>          (one per variable, "inf"/"-inf" allowed)
///   EQ|GE <label> <rhs> <k> j:a ...
void dump(const LpProblem& problem, std::ostream& out);

}  // namespace esscoord::lp
