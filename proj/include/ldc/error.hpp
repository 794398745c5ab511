#pragma once

#include <stdexcept>
#include <string>

namespace ldc {

// Bad user input: malformed parameters, densities, scenario fields.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Adaptive quadrature ran out of panels before meeting its tolerance.
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, double partial_value, double partial_error)
      : std::runtime_error(what), partial_value_(partial_value), partial_error_(partial_error) {}

  double partial_value() const noexcept { return partial_value_; }
  double partial_error() const noexcept { return partial_error_; }

 private:
  double partial_value_;
  double partial_error_;
};

// A scenario that is well formed but has nothing meaningful to compute:
// no finite L-projection, an empty bad set, a single projection for an
// equi-concentration run.
class DegenerateScenario : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ldc
