#pragma once

#include <stdexcept>
#include <string>

namespace pqosc {

/// Malformed or inconsistent run configuration (CLI exit code 2).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& m) : std::runtime_error(m) {}
};

/// Parameter set violates a model constraint (CLI exit code 3).
struct PhysicsError : std::runtime_error {
    explicit PhysicsError(const std::string& m) : std::runtime_error(m) {}
};

/// Numerical failure: non-convergence, quadrature breakdown, caustic,
/// conditioning loss (CLI exit code 4).
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& m) : std::runtime_error(m) {}
};

} // namespace pqosc
