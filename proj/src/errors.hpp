#pragma once
// Error types shared across the solver. Argument and domain violations reuse
// the standard exceptions; everything with numerical context gets its own
// type so callers (and the C API) can tell failure modes apart.

#include <stdexcept>
#include <string>

namespace otdens {

struct AlignmentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CompatibilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalFailure : std::runtime_error {
  double residual;
  NumericalFailure(const std::string& msg, double res)
      : std::runtime_error(msg), residual(res) {}
};

struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateStartError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NewtonFailure : std::runtime_error {
  int iterations;
  long steps_completed;  // accepted flow steps before the failing one
  NewtonFailure(const std::string& msg, int iters, long steps = -1)
      : std::runtime_error(msg), iterations(iters), steps_completed(steps) {}
};

struct StagnationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StepSizeTooLarge : std::runtime_error {
  long step;
  double increase;
  StepSizeTooLarge(const std::string& msg, long s, double inc)
      : std::runtime_error(msg), step(s), increase(inc) {}
};

struct InsufficientDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace otdens
