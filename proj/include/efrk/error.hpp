#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace efrk {

/// Raised for malformed grids, parameters, tableaux and configuration files.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a stage produces a non-finite value.
///
/// `stage` is the 1-based stage index of the failing one-step map (0 when the
/// failure is detected outside a stage, e.g. in the initial data). The driver
/// fills in `time` and `step` before rethrowing.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, int stage, double time = 0.0,
                 std::size_t step = 0)
      : std::runtime_error(what), stage_(stage), time_(time), step_(step) {}

  int stage() const noexcept { return stage_; }
  double time() const noexcept { return time_; }
  std::size_t step() const noexcept { return step_; }

 private:
  int stage_;
  double time_;
  std::size_t step_;
};

}  // namespace efrk
