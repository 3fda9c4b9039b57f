#pragma once

#include <stdexcept>
#include <string>

namespace sdf {

/// Bad input data: unreadable files, malformed CSV, shape mismatches.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration values or config/model schema violations.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A model or weight vector that breaks a structural invariant
/// (simplex feasibility, distribution normalization, width chaining).
class InvariantError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace sdf
