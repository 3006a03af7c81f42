#pragma once

#include <stdexcept>
#include <string>

namespace iovsim {

// Error taxonomy, grouped by the CLI exit code that reports it.

/// Bad configuration or usage (CLI exit 2).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Input data unusable: too short, too few points, missing file (CLI exit 3).
struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

struct InsufficientData : DataError {
    explicit InsufficientData(const std::string& what) : DataError(what) {}
};

struct TooFewPoints : DataError {
    explicit TooFewPoints(const std::string& what) : DataError(what) {}
};

struct IoError : DataError {
    explicit IoError(const std::string& what) : DataError(what) {}
};

/// Internal invariant violation (CLI exit 4).
struct InternalError : std::logic_error {
    explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

struct DimensionMismatch : InternalError {
    explicit DimensionMismatch(const std::string& what) : InternalError(what) {}
};

struct TraceMismatch : InternalError {
    explicit TraceMismatch(const std::string& what) : InternalError(what) {}
};

struct LengthMismatch : InternalError {
    explicit LengthMismatch(const std::string& what) : InternalError(what) {}
};

struct EmptyInput : DataError {
    explicit EmptyInput(const std::string& what) : DataError(what) {}
};

/// Markov matrix has no reachable stationary distribution.
struct NonErgodic : DataError {
    explicit NonErgodic(const std::string& what) : DataError(what) {}
};

/// Clustering collapsed to fewer than two populated clusters.
struct DegenerateClustering : DataError {
    explicit DegenerateClustering(const std::string& what) : DataError(what) {}
};

}  // namespace iovsim
