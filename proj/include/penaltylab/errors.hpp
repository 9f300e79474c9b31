// errors.hpp — exception types shared by the library and the CLI

#pragma once

#include <stdexcept>
#include <string>

namespace penaltylab {

// Malformed or out-of-range input (config values, dimensions, labels).
struct ConfigError : std::invalid_argument {
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// A physical precondition failed: state outside the ground subspace, a code
// that does not detect a coupling, a logical map that breaks commutation.
struct ContractViolation : std::runtime_error {
    explicit ContractViolation(const std::string& what) : std::runtime_error(what) {}
};

// Quadrature or integrator did not reach the requested accuracy, or a
// tolerance-based grouping was ambiguous.
struct NumericalFailure : std::runtime_error {
    explicit NumericalFailure(const std::string& what) : std::runtime_error(what) {}
};

} // namespace penaltylab
