#pragma once

#include <stdexcept>
#include <string>

namespace sol {

/// Malformed textual input (basis grammar, config files, CSV payloads).
/// Carries a 1-based line number when the source is a line-oriented file,
/// -1 otherwise.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& message, int line = -1)
      : std::runtime_error(line >= 0 ? "line " + std::to_string(line) + ": " + message
                                     : message),
        line_(line) {}

  [[nodiscard]] int line() const { return line_; }

 private:
  int line_;
};

/// A state or parameter matrix stopped being finite (or exceeded the hard
/// magnitude cap) during integration. Carries the sample step at which the
/// blow-up was detected, -1 if unknown.
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& message, long step = -1)
      : std::runtime_error(step >= 0 ? message + " at step " + std::to_string(step)
                                     : message),
        step_(step) {}

  [[nodiscard]] long step() const { return step_; }

 private:
  long step_;
};

/// A linear-algebra subproblem that must be well posed was not (singular or
/// near-singular matrix where the model guarantees conditioning).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sol
