#pragma once

#include <stdexcept>
#include <string>

namespace quatlag {

// Thrown by normalize() when the input norm is below the degeneracy floor.
struct DegenerateQuaternion : std::runtime_error {
    explicit DegenerateQuaternion(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a generalized velocity is not tangent to the unit sphere at q.
struct TangencyViolation : std::runtime_error {
    explicit TangencyViolation(const std::string& what) : std::runtime_error(what) {}
};

// Thrown by pe_metric() when the history is shorter than the requested window.
struct InsufficientHistory : std::runtime_error {
    explicit InsufficientHistory(const std::string& what) : std::runtime_error(what) {}
};

// Thrown by metrics() when given no records.
struct EmptyRecords : std::runtime_error {
    explicit EmptyRecords(const std::string& what) : std::runtime_error(what) {}
};

// Bad scenario configuration (unknown preset, missing gains, invalid values...).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// The closed loop blew up (|omega| above the divergence guard).
struct NumericalDivergence : std::runtime_error {
    explicit NumericalDivergence(const std::string& what) : std::runtime_error(what) {}
};

} // namespace quatlag
