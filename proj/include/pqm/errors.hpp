#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pqm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument to a constructor or operation.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Inputs are individually valid but violate an operation's precondition
/// (e.g. a test function not contained in the region it is paired with).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A document (space, field, config) could not be loaded. Every violated
/// rule is listed in `issues()`, one line each.
class LoadError : public Error {
 public:
  explicit LoadError(std::vector<std::string> issues)
      : Error(join(issues)), issues_(std::move(issues)) {}

  const std::vector<std::string>& issues() const noexcept { return issues_; }

 private:
  static std::string join(const std::vector<std::string>& issues) {
    std::string out = "load failed:";
    for (const auto& line : issues) {
      out += "\n  - ";
      out += line;
    }
    return out;
  }

  std::vector<std::string> issues_;
};

/// Inner solve did not reach its tolerance. Carries the last iterate.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> last_iterate,
                   double residual, int iterations)
      : Error(what),
        last_iterate_(std::move(last_iterate)),
        residual_(residual),
        iterations_(iterations) {}

  const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }
  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  std::vector<double> last_iterate_;
  double residual_;
  int iterations_;
};

}  // namespace pqm
