#pragma once

#include <stdexcept>
#include <string>

namespace westervelt {

/// Invalid user input: configuration values, mesh parameters, kernel parameters.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Numerical failure inside a solve: non-convergent CG, fixed-point divergence.
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

/// The leading coefficient 1 + k*u left the admissible band [1/2, 3/2].
class DegeneracyError : public SolverError {
public:
    explicit DegeneracyError(const std::string& what) : SolverError(what) {}
};

}  // namespace westervelt
