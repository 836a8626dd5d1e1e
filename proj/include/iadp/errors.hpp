#pragma once

#include <stdexcept>
#include <string>

namespace iadp {

// Exit code contract used by the CLI:
//   0 success, 2 validation failure, 3 runtime divergence, 1 anything else.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitDivergence = 3;
inline constexpr int kExitError = 1;

// Config or parameter rejected by a validator.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Simulation or learner produced a non-finite or numerically meaningless
// result. Message carries the tick index and a state dump.
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Inertia matrix condition number above threshold.
struct SingularPlantError : DivergenceError {
  using DivergenceError::DivergenceError;
};

// Task-space target outside the reachable workspace.
struct IkRangeError : std::domain_error {
  using std::domain_error::domain_error;
};

}  // namespace iadp
