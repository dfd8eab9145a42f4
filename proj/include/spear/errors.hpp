#pragma once

#include <stdexcept>
#include <string>

namespace spear {

/// Bad configuration (unknown key, invalid value, inconsistent dims). CLI exit 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bad or missing input data (unreadable file, malformed CSV, non-finite value). CLI exit 3.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure (non-finite activation/gradient/loss, CRC mismatch). CLI exit 4.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace spear
