// errors.hpp — exception types mapped to CLI exit codes

#pragma once

#include <stdexcept>
#include <string>

namespace ensq {

// Bad user input: unknown key, malformed value, contract violation. Exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A physics/budget guard refused to run: truncation too small, no crossing
// found, non-convergence. Exit code 3.
struct GuardError : std::runtime_error {
    explicit GuardError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical breakdown (NaN, step underflow). Exit code 4.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace ensq
