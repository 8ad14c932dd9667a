#pragma once

#include <stdexcept>
#include <string>

namespace afmm {

// Invalid configuration (bad parameter values, malformed config file). CLI exit code 1.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad or missing input data (CSV rows, filings, panels). CLI exit code 2.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure (rank-deficient design, degenerate statistics). CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Violated call contract (mismatched lengths, empty required input). Indicates a caller bug.
class ContractError : public std::logic_error {
public:
    explicit ContractError(const std::string& msg) : std::logic_error(msg) {}
};

} // namespace afmm
