#pragma once

#include <stdexcept>
#include <string>

namespace rankshrink {

/// Precondition violated by caller-supplied data or arguments.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical routine failed to produce a usable answer (divergence,
/// singular system, unidentifiable fit).
class NumericalFailure : public std::runtime_error {
public:
    NumericalFailure(const std::string& what, int iterations = 0, double last_deviance = 0.0)
        : std::runtime_error(what), iterations_(iterations), last_deviance_(last_deviance) {}

    int iterations() const noexcept { return iterations_; }
    double last_deviance() const noexcept { return last_deviance_; }

private:
    int iterations_;
    double last_deviance_;
};

/// Inconsistent run configuration (unknown scheme, estimator not available
/// for a model family, ...).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Unreadable or malformed input file. `line()` is 1-based, 0 if unknown.
class IoError : public std::runtime_error {
public:
    IoError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace rankshrink
