#pragma once

#include <stdexcept>
#include <string>

namespace bnmimo {

/// Input rejected before any computation (bad dimensions, bad config, ...).
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// A numerical routine failed (non-convergence, indefinite matrix, ...).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// A file could not be read or written.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// A built-in self-check did not hold.
class SelfTestError : public std::runtime_error {
public:
    explicit SelfTestError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace bnmimo
