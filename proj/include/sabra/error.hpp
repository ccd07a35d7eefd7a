#pragma once

#include <stdexcept>
#include <string>

namespace sabra {

/// Raised when an argument violates an operation's precondition.
class PreconditionError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Raised by integrators and estimators when a computation leaves its
/// validity region (blow-up, solver non-convergence, non-finite observables).
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool condition, const std::string &message) {
    if (!condition) {
        throw PreconditionError(message);
    }
}

}  // namespace detail
}  // namespace sabra
