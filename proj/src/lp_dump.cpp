#include <iomanip>
#include <ostream>

#include "esscoord/lp.hpp"

namespace esscoord::lp {

namespace {

void write_number(std::ostream& out, double v) {
  if (v == kInfinity)
    out << "inf";
  else if (v == -kInfinity)
    out << "-inf";
  else
    out << std::setprecision(17) << v;
}

void write_row(std::ostream& out, const char* kind, const Constraint& row, std::size_t index) {
  out << kind << ' ' << (row.label.empty() ? "r" + std::to_string(index) : row.label) << ' ';
  write_number(out, row.rhs);
  out << ' ' << row.terms.size();
  for (const auto& t : row.terms) {
    out << ' ' << t.var << ':';
    write_number(out, t.coeff);
  }
  out << '\n';
}

}  // namespace

void dump(const LpProblem& problem, std::ostream& out) {
  out << "VARS " << problem.num_variables() << '\n' << "OBJ";
  for (double c : problem.objective) {
    out << ' ';
    write_number(out, c);
  }
  out << '\n';
  for (std::size_t j = 0; j < problem.num_variables(); ++j) {
    out << "BOUND " << j << ' ';
    write_number(out, problem.lower[j]);
    out << ' ';
    write_number(out, problem.upper[j]);
    out << '\n';
  }
  for (std::size_t i = 0; i < problem.equalities.size(); ++i) write_row(out, "EQ", problem.equalities[i], i);
  for (std::size_t i = 0; i < problem.inequalities.size(); ++i)
    write_row(out, "GE", problem.inequalities[i], problem.equalities.size() + i);
}

}  // namespace esscoord::lp
