#include "esscoord/lp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include "esscoord/errors.hpp"

namespace esscoord::lp {

namespace {
std::atomic<std::size_t> g_certified{0};
}  // namespace

std::size_t certified_solve_count() noexcept { return g_certified.load(); }

ToleranceSet ToleranceSet::from_env() {
  ToleranceSet tol;
  auto read = [](const char* name, double& target) {
    const char* raw = std::getenv(name);
    if (raw == nullptr || *raw == '\0') return;
    char* end = nullptr;
    const double parsed = std::strtod(raw, &end);
    if (end == raw || *end != '\0' || !std::isfinite(parsed) || parsed <= 0.0)
      throw std::invalid_argument(std::string(name) + " must be a positive number, got '" + raw + "'");
    target = parsed;
  };
  read("ESSCOORD_TOL_FEAS", tol.feas);
  read("ESSCOORD_TOL_GAP", tol.gap);
  read("ESSCOORD_TOL_CS", tol.cs);
  return tol;
}

std::size_t LpProblem::add_variable(double cost, double lo, double hi) {
  objective.push_back(cost);
  lower.push_back(lo);
  upper.push_back(hi);
  return objective.size() - 1;
}

std::size_t LpProblem::add_equality(std::vector<Term> terms, double rhs, std::string label) {
  equalities.push_back({std::move(terms), rhs, std::move(label)});
  return equalities.size() - 1;
}

std::size_t LpProblem::add_greater_equal(std::vector<Term> terms, double rhs, std::string label) {
  inequalities.push_back({std::move(terms), rhs, std::move(label)});
  return equalities.size() + inequalities.size() - 1;
}

std::optional<std::size_t> LpProblem::find_row(const std::string& label) const {
  for (std::size_t i = 0; i < equalities.size(); ++i)
    if (equalities[i].label == label) return i;
  for (std::size_t i = 0; i < inequalities.size(); ++i)
    if (inequalities[i].label == label) return equalities.size() + i;
  return std::nullopt;
}

void LpProblem::check() const {
  const std::size_t n = objective.size();
  if (n == 0) throw std::invalid_argument("LP has no variables");
  if (lower.size() != n || upper.size() != n)
    throw std::invalid_argument("LP bound vectors do not match the variable count");
  for (std::size_t j = 0; j < n; ++j) {
    if (!std::isfinite(objective[j])) throw std::invalid_argument("non-finite objective coefficient");
    if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] > upper[j] || lower[j] == kInfinity ||
        upper[j] == -kInfinity)
      throw std::invalid_argument("invalid bounds on variable " + std::to_string(j));
  }
  auto check_rows = [n](const std::vector<Constraint>& rows) {
    for (const auto& row : rows) {
      if (!std::isfinite(row.rhs)) throw std::invalid_argument("non-finite rhs in row '" + row.label + "'");
      for (const auto& t : row.terms) {
        if (t.var >= n) throw std::invalid_argument("row '" + row.label + "' references a missing variable");
        if (!std::isfinite(t.coeff)) throw std::invalid_argument("non-finite coefficient in row '" + row.label + "'");
      }
    }
  };
  check_rows(equalities);
  check_rows(inequalities);
}

const char* to_string(LpStatus status) noexcept {
  switch (status) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
  }
  return "unknown";
}

std::vector<double> LpSolution::duals() const {
  std::vector<double> all(duals_eq);
  all.insert(all.end(), duals_ineq.begin(), duals_ineq.end());
  return all;
}

namespace {

enum class State : std::uint8_t { basic, lower, upper, zero, fixed };

constexpr double kPivotTol = 1e-9;
constexpr double kRcondFloor = 1e-13;
constexpr std::size_t kRefactorEvery = 64;
constexpr std::size_t kDegenerateStreakForBland = 25;

// Columns are laid out as [structural | inequality slacks | artificials].
// Inequality row i reads a_i'x - s_i = b_i with s_i >= 0.
class Simplex {
 public:
  Simplex(const LpProblem& p, const ToleranceSet& tol);
  LpSolution run();

 private:
  enum class Outcome { optimal, unbounded };

  Outcome optimize(const Eigen::VectorXd& cost);
  void refactor();
  void prices(const Eigen::VectorXd& cost, Eigen::VectorXd& y, Eigen::VectorXd& d) const;
  void pivot(std::size_t row, std::size_t entering, const Eigen::VectorXd& alpha);
  void drive_out_artificials();
  LpSolution finish_optimal(const Eigen::VectorXd& cost);
  void verify(const LpSolution& sol, const Eigen::VectorXd& y, const Eigen::VectorXd& d) const;

  bool is_artificial(std::size_t col) const { return col >= art_start_; }

  const LpProblem& p_;
  ToleranceSet tol_;
  std::size_t nv_, ne_, ni_, m_, art_start_, ncols_;
  Eigen::MatrixXd a_;
  Eigen::VectorXd b_, lo_, hi_, x_;
  std::vector<State> state_;
  std::vector<std::size_t> basis_;
  Eigen::MatrixXd binv_;
  std::size_t iterations_ = 0;
  std::size_t since_refactor_ = 0;
  std::size_t limit_;
  double opt_tol_ = 1e-10;
};

Simplex::Simplex(const LpProblem& p, const ToleranceSet& tol)
    : p_(p),
      tol_(tol),
      nv_(p.num_variables()),
      ne_(p.equalities.size()),
      ni_(p.inequalities.size()),
      m_(ne_ + ni_),
      art_start_(nv_ + ni_),
      ncols_(nv_ + ni_ + m_) {
  a_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(ncols_));
  b_.resize(static_cast<Eigen::Index>(m_));
  for (std::size_t i = 0; i < ne_; ++i) {
    for (const auto& t : p.equalities[i].terms) a_(i, t.var) += t.coeff;
    b_(i) = p.equalities[i].rhs;
  }
  for (std::size_t k = 0; k < ni_; ++k) {
    const std::size_t i = ne_ + k;
    for (const auto& t : p.inequalities[k].terms) a_(i, t.var) += t.coeff;
    a_(i, nv_ + k) = -1.0;
    b_(i) = p.inequalities[k].rhs;
  }

  lo_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ncols_));
  hi_ = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(ncols_), kInfinity);
  x_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ncols_));
  state_.assign(ncols_, State::lower);

  for (std::size_t j = 0; j < nv_; ++j) {
    lo_(j) = p.lower[j];
    hi_(j) = p.upper[j];
    const bool lo_finite = std::isfinite(p.lower[j]);
    const bool hi_finite = std::isfinite(p.upper[j]);
    if (lo_finite && hi_finite && p.lower[j] == p.upper[j]) {
      state_[j] = State::fixed;
      x_(j) = p.lower[j];
    } else if (lo_finite) {
      state_[j] = State::lower;
      x_(j) = p.lower[j];
    } else if (hi_finite) {
      state_[j] = State::upper;
      x_(j) = p.upper[j];
    } else {
      state_[j] = State::zero;
      x_(j) = 0.0;
    }
  }

  // Crash basis: a slack where it is feasible, an artificial otherwise.
  const Eigen::VectorXd residual = b_ - a_.leftCols(static_cast<Eigen::Index>(nv_)) *
                                            x_.head(static_cast<Eigen::Index>(nv_));
  basis_.assign(m_, 0);
  binv_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(m_));
  for (std::size_t i = 0; i < m_; ++i) {
    const std::size_t art = art_start_ + i;
    const double r = residual(i);
    if (i >= ne_ && r <= 0.0) {
      const std::size_t slack = nv_ + (i - ne_);
      basis_[i] = slack;
      state_[slack] = State::basic;
      x_(slack) = -r;
      binv_(i, i) = -1.0;
      a_(i, art) = 1.0;
      state_[art] = State::fixed;
    } else {
      const double sign = r >= 0.0 ? 1.0 : -1.0;
      a_(i, art) = sign;
      basis_[i] = art;
      state_[art] = State::basic;
      x_(art) = std::abs(r);
      binv_(i, i) = sign;
    }
  }

  double cost_scale = 1.0;
  for (double c : p.objective) cost_scale = std::max(cost_scale, std::abs(c));
  opt_tol_ = 1e-10 * cost_scale;
  limit_ = 50 * (m_ + ncols_) + 1000;
}

void Simplex::refactor() {
  since_refactor_ = 0;
  if (m_ == 0) return;
  Eigen::MatrixXd basis_matrix(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(m_));
  for (std::size_t i = 0; i < m_; ++i) basis_matrix.col(i) = a_.col(basis_[i]);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis_matrix);
  if (!(lu.rcond() > kRcondFloor))
    throw SolverError("LP numerical breakdown: basis matrix is near singular (rcond " +
                      std::to_string(lu.rcond()) + ")");
  binv_ = lu.inverse();

  Eigen::VectorXd rhs = b_;
  for (std::size_t j = 0; j < ncols_; ++j)
    if (state_[j] != State::basic && x_(j) != 0.0) rhs -= a_.col(j) * x_(j);
  const Eigen::VectorXd xb = binv_ * rhs;
  for (std::size_t i = 0; i < m_; ++i) x_(basis_[i]) = xb(i);
}

void Simplex::prices(const Eigen::VectorXd& cost, Eigen::VectorXd& y, Eigen::VectorXd& d) const {
  Eigen::VectorXd cb(static_cast<Eigen::Index>(m_));
  for (std::size_t i = 0; i < m_; ++i) cb(i) = cost(basis_[i]);
  y = binv_.transpose() * cb;
  d = cost - a_.transpose() * y;
}

void Simplex::pivot(std::size_t row, std::size_t entering, const Eigen::VectorXd& alpha) {
  const double pivot_value = alpha(row);
  if (std::abs(pivot_value) < kPivotTol)
    throw SolverError("LP numerical breakdown: pivot magnitude below floor");
  binv_.row(row) /= pivot_value;
  for (std::size_t i = 0; i < m_; ++i) {
    if (i == row || alpha(i) == 0.0) continue;
    binv_.row(i) -= alpha(i) * binv_.row(row);
  }
  basis_[row] = entering;
  state_[entering] = State::basic;
  ++since_refactor_;
}

Simplex::Outcome Simplex::optimize(const Eigen::VectorXd& cost) {
  bool bland = false;
  std::size_t degenerate_streak = 0;
  Eigen::VectorXd y, d;
  for (;;) {
    if (iterations_ >= limit_) throw SolverError("LP iteration limit reached (" + std::to_string(limit_) + ")");
    if (since_refactor_ >= kRefactorEvery) refactor();
    prices(cost, y, d);

    // Pricing: Dantzig, or Bland's smallest-index rule after a run of
    // degenerate pivots.
    std::ptrdiff_t entering = -1;
    double dir = 0.0;
    double best = 0.0;
    for (std::size_t j = 0; j < ncols_; ++j) {
      double candidate_dir = 0.0;
      switch (state_[j]) {
        case State::lower:
          if (d(j) < -opt_tol_) candidate_dir = 1.0;
          break;
        case State::upper:
          if (d(j) > opt_tol_) candidate_dir = -1.0;
          break;
        case State::zero:
          if (std::abs(d(j)) > opt_tol_) candidate_dir = d(j) < 0.0 ? 1.0 : -1.0;
          break;
        default:
          break;
      }
      if (candidate_dir == 0.0) continue;
      if (bland) {
        entering = static_cast<std::ptrdiff_t>(j);
        dir = candidate_dir;
        break;
      }
      if (std::abs(d(j)) > best) {
        best = std::abs(d(j));
        entering = static_cast<std::ptrdiff_t>(j);
        dir = candidate_dir;
      }
    }
    if (entering < 0) return Outcome::optimal;
    const auto q = static_cast<std::size_t>(entering);

    const Eigen::VectorXd alpha = binv_ * a_.col(q);

    // Ratio test.
    double theta = kInfinity;
    std::ptrdiff_t leave = -1;
    bool leave_to_lower = true;
    for (std::size_t i = 0; i < m_; ++i) {
      if (std::abs(alpha(i)) <= kPivotTol) continue;
      const std::size_t k = basis_[i];
      const double delta = -dir * alpha(i);
      double limit;
      bool to_lower;
      if (delta < 0.0) {
        if (!std::isfinite(lo_(k))) continue;
        limit = (x_(k) - lo_(k)) / -delta;
        to_lower = true;
      } else {
        if (!std::isfinite(hi_(k))) continue;
        limit = (hi_(k) - x_(k)) / delta;
        to_lower = false;
      }
      limit = std::max(limit, 0.0);
      const double tie = 1e-12 * (1.0 + std::abs(theta == kInfinity ? limit : theta));
      bool take = false;
      if (leave < 0 || limit < theta - tie) {
        take = true;
      } else if (limit <= theta + tie) {
        const std::size_t current = basis_[static_cast<std::size_t>(leave)];
        if (bland)
          take = k < current;
        else
          take = std::abs(alpha(i)) > std::abs(alpha(leave)) ||
                 (std::abs(alpha(i)) == std::abs(alpha(leave)) && k < current);
      }
      if (take) {
        theta = std::min(theta, limit);
        leave = static_cast<std::ptrdiff_t>(i);
        leave_to_lower = to_lower;
      }
    }
    const double flip = (std::isfinite(lo_(q)) && std::isfinite(hi_(q))) ? hi_(q) - lo_(q) : kInfinity;
    if (leave < 0 && flip == kInfinity) return Outcome::unbounded;

    const bool bound_flip = flip <= theta;
    const double step = bound_flip ? flip : theta;
    for (std::size_t i = 0; i < m_; ++i) x_(basis_[i]) -= dir * alpha(i) * step;
    x_(q) += dir * step;
    ++iterations_;

    if (bound_flip) {
      state_[q] = dir > 0.0 ? State::upper : State::lower;
      x_(q) = dir > 0.0 ? hi_(q) : lo_(q);
    } else {
      const auto r = static_cast<std::size_t>(leave);
      const std::size_t k = basis_[r];
      x_(k) = leave_to_lower ? lo_(k) : hi_(k);
      if (is_artificial(k) || lo_(k) == hi_(k))
        state_[k] = State::fixed;
      else
        state_[k] = leave_to_lower ? State::lower : State::upper;
      pivot(r, q, alpha);
    }

    if (step <= 1e-12) {
      if (++degenerate_streak >= kDegenerateStreakForBland) bland = true;
    } else {
      degenerate_streak = 0;
      bland = false;
    }
  }
}

void Simplex::drive_out_artificials() {
  for (std::size_t r = 0; r < m_; ++r) {
    if (!is_artificial(basis_[r])) continue;
    const Eigen::RowVectorXd row = binv_.row(r) * a_;
    std::ptrdiff_t best = -1;
    double best_mag = 1e-7;
    for (std::size_t j = 0; j < art_start_; ++j) {
      if (state_[j] == State::basic || state_[j] == State::fixed) continue;
      if (std::abs(row(j)) > best_mag) {
        best_mag = std::abs(row(j));
        best = static_cast<std::ptrdiff_t>(j);
      }
    }
    if (best < 0) continue;  // redundant row; artificial stays basic at zero
    const auto q = static_cast<std::size_t>(best);
    const std::size_t art = basis_[r];
    const Eigen::VectorXd alpha = binv_ * a_.col(q);
    x_(art) = 0.0;
    state_[art] = State::fixed;
    pivot(r, q, alpha);
  }
  refactor();
}

LpSolution Simplex::run() {
  LpSolution sol;
  limit_ = std::max<std::size_t>(limit_, 1000);

  double infeasibility = 0.0;
  for (std::size_t i = 0; i < m_; ++i)
    if (is_artificial(basis_[i])) infeasibility += x_(basis_[i]);

  if (infeasibility > 0.0) {
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ncols_));
    phase1.tail(static_cast<Eigen::Index>(m_)).setOnes();
    optimize(phase1);
    refactor();
    double remaining = 0.0;
    for (std::size_t i = 0; i < m_; ++i)
      if (is_artificial(basis_[i])) remaining += std::abs(x_(basis_[i]));
    const double scale = std::max(1.0, b_.size() > 0 ? b_.cwiseAbs().maxCoeff() : 0.0);
    if (remaining > tol_.feas * scale) {
      Eigen::VectorXd y, d;
      prices(phase1, y, d);
      sol.status = LpStatus::infeasible;
      sol.primal.assign(x_.data(), x_.data() + nv_);
      sol.farkas.assign(y.data(), y.data() + m_);
      sol.iterations = iterations_;
      return sol;
    }
  }

  for (std::size_t i = 0; i < m_; ++i) {
    const std::size_t art = art_start_ + i;
    hi_(art) = 0.0;
    if (state_[art] != State::basic) {
      state_[art] = State::fixed;
      x_(art) = 0.0;
    }
  }
  if (m_ > 0) drive_out_artificials();

  Eigen::VectorXd cost = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ncols_));
  for (std::size_t j = 0; j < nv_; ++j) cost(j) = p_.objective[j];
  if (optimize(cost) == Outcome::unbounded) {
    sol.status = LpStatus::unbounded;
    sol.primal.assign(x_.data(), x_.data() + nv_);
    sol.objective_value = -kInfinity;
    sol.iterations = iterations_;
    return sol;
  }
  return finish_optimal(cost);
}

LpSolution Simplex::finish_optimal(const Eigen::VectorXd& cost) {
  refactor();
  // Artificials left basic sit on redundant rows.
  for (std::size_t i = 0; i < m_; ++i) {
    const std::size_t k = basis_[i];
    if (is_artificial(k)) x_(k) = 0.0;
  }
  Eigen::VectorXd y, d;
  prices(cost, y, d);

  LpSolution sol;
  sol.status = LpStatus::optimal;
  sol.iterations = iterations_;
  sol.primal.assign(x_.data(), x_.data() + nv_);
  sol.objective_value = 0.0;
  for (std::size_t j = 0; j < nv_; ++j) sol.objective_value += p_.objective[j] * sol.primal[j];
  sol.duals_eq.assign(y.data(), y.data() + ne_);
  sol.duals_ineq.assign(y.data() + ne_, y.data() + m_);
  sol.reduced_costs.assign(d.data(), d.data() + nv_);

  for (std::size_t i = 0; i < m_ && !sol.degenerate; ++i) {
    const std::size_t k = basis_[i];
    if (is_artificial(k)) {
      sol.degenerate = true;
      continue;
    }
    const double bt = tol_.feas;
    if ((std::isfinite(lo_(k)) && x_(k) - lo_(k) <= bt * std::max(1.0, std::abs(lo_(k)))) ||
        (std::isfinite(hi_(k)) && hi_(k) - x_(k) <= bt * std::max(1.0, std::abs(hi_(k)))))
      sol.degenerate = true;
  }
  verify(sol, y, d);
  ++g_certified;
  return sol;
}

void Simplex::verify(const LpSolution& sol, const Eigen::VectorXd& y, const Eigen::VectorXd& d) const {
  std::ostringstream problems;
  const auto& x = sol.primal;

  for (std::size_t j = 0; j < nv_; ++j) {
    if (x[j] < lo_(j) - tol_.feas || x[j] > hi_(j) + tol_.feas)
      problems << "variable " << j << " violates its bounds by more than tol_feas; ";
  }
  auto activity = [&x](const Constraint& row) {
    double s = 0.0;
    for (const auto& t : row.terms) s += t.coeff * x[t.var];
    return s;
  };
  for (std::size_t i = 0; i < ne_; ++i) {
    const double r = activity(p_.equalities[i]) - p_.equalities[i].rhs;
    if (std::abs(r) > tol_.feas) problems << "equality row " << i << " residual " << r << "; ";
  }
  for (std::size_t k = 0; k < ni_; ++k) {
    const double slack = activity(p_.inequalities[k]) - p_.inequalities[k].rhs;
    if (slack < -tol_.feas) problems << "inequality row " << k << " violated by " << -slack << "; ";
    const double mult = y(static_cast<Eigen::Index>(ne_ + k));
    if (mult < -tol_.cs) problems << "inequality multiplier " << k << " negative; ";
    if (std::abs(mult * slack) > tol_.cs) problems << "complementary slackness fails on row " << k << "; ";
  }

  // Dual objective of the bounded form: b'y + sum over columns of the bound
  // terms selected by the sign of the reduced cost.
  double dual = 0.0;
  for (std::size_t i = 0; i < m_; ++i) dual += b_(i) * y(i);
  for (std::size_t j = 0; j < ncols_; ++j) {
    const double dj = d(j);
    if (std::abs(dj) <= opt_tol_) {
      dual += dj * x_(j);
      continue;
    }
    const double bound = dj > 0.0 ? lo_(j) : hi_(j);
    if (!std::isfinite(bound)) {
      problems << "reduced cost of column " << j << " has the wrong sign; ";
      continue;
    }
    dual += dj * bound;
    if (j < nv_ && std::abs(dj * (x_(j) - bound)) > tol_.cs)
      problems << "complementary slackness fails on variable bound " << j << "; ";
  }
  const double gap = std::abs(sol.objective_value - dual);
  if (gap > tol_.gap * std::max(1.0, std::abs(sol.objective_value)))
    problems << "duality gap " << gap << "; ";

  const std::string msg = problems.str();
  if (!msg.empty()) throw SolverError("LP optimality certificate failed: " + msg);
}

}  // namespace

LpSolution solve(const LpProblem& problem, const ToleranceSet& tol) {
  problem.check();
  Simplex simplex(problem, tol);
  return simplex.run();
}

}  // namespace esscoord::lp
