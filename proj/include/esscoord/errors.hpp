#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace esscoord {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed scenario document, CSV, or result file.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// One or more violated invariants. `issues()` lists every violation found,
/// each naming the offending indices.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> issues)
      : Error(join(issues)), issues_(std::move(issues)) {}

  const std::vector<std::string>& issues() const noexcept { return issues_; }

 private:
  static std::string join(const std::vector<std::string>& issues) {
    std::string out = "validation failed";
    for (const auto& issue : issues) out += "\n  - " + issue;
    return out;
  }

  std::vector<std::string> issues_;
};

/// Numerical breakdown or iteration limit inside the LP kernel.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// A per-user dispatch LP came back infeasible. Cannot happen for validated
/// scenarios because grid purchases are unbounded above.
class InfeasibleDispatchError : public SolverError {
 public:
  using SolverError::SolverError;
};

/// A post-hoc consistency check failed (e.g. simultaneous charge and
/// discharge in the cooperative optimum).
class ConsistencyError : public SolverError {
 public:
  using SolverError::SolverError;
};

}  // namespace esscoord
