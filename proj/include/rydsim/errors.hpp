// Error taxonomy shared across modules. ConfigError maps to CLI exit code 2,
// NumericError to exit code 3; plain std::invalid_argument marks programming
// errors (precondition violations).
#pragma once

#include <stdexcept>
#include <string>

namespace rydsim {

/// Invalid or inconsistent user-facing configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Numerical failure: tolerance not met within budget, non-finite values, etc.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace rydsim
