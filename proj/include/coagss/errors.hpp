#pragma once

#include <stdexcept>
#include <string>

namespace coagss {

// Base for everything thrown by the library. The CLI maps these to exit
// status 1 (or 2 where a command is specified to degrade instead of fail).
class Error : public std::runtime_error {
public:
  Error(std::string category, const std::string& msg)
      : std::runtime_error(category + ": " + msg), category_(std::move(category)) {}
  const std::string& category() const { return category_; }

private:
  std::string category_;
};

struct DomainError : Error {
  explicit DomainError(const std::string& msg) : Error("domain", msg) {}
};

// Infinite-range integral requested on a function without a usable tail closure.
struct ClosureMissingError : Error {
  explicit ClosureMissingError(const std::string& msg) : Error("closure-missing", msg) {}
};

struct DegenerateProfileError : Error {
  explicit DegenerateProfileError(const std::string& msg) : Error("degenerate-profile", msg) {}
};

// f <= 0 where a positive profile is required; carries the offending node.
struct PositivityError : Error {
  PositivityError(const std::string& msg, double node_x) : Error("positivity", msg), node(node_x) {}
  double node;
};

struct TailNotExponentialError : Error {
  explicit TailNotExponentialError(const std::string& msg) : Error("tail-not-exponential", msg) {}
};

struct RangeError : Error {
  explicit RangeError(const std::string& msg) : Error("range", msg) {}
};

// Iterative refinement hit its budget; carries the best estimate reached.
struct ConvergenceError : Error {
  ConvergenceError(const std::string& msg, double achieved_value, double achieved_error)
      : Error("convergence", msg), achieved(achieved_value), error_estimate(achieved_error) {}
  double achieved;
  double error_estimate;
};

struct NumericalFailureError : Error {
  explicit NumericalFailureError(const std::string& msg) : Error("numerical-failure", msg) {}
};

struct InvariantError : Error {
  explicit InvariantError(const std::string& msg) : Error("invariant", msg) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error("config", msg) {}
};

struct IoError : Error {
  explicit IoError(const std::string& msg) : Error("io", msg) {}
};

}  // namespace coagss
