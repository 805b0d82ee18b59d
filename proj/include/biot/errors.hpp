#pragma once

#include <stdexcept>
#include <string>

namespace biot {

/// Invalid user input: bad counts, missing properties, malformed config.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Mesh geometry that violates the invariants the discretizations rely on.
class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Linear or nonlinear solver failure (breakdown, singular system, no convergence).
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace biot
