// errors.hpp — Error categories shared by the library and the command-line runner

#pragma once

#include <stdexcept>
#include <string>

namespace dce {

enum class ErrorCategory { config, truncation, numerical };

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

// Malformed or inconsistent model/simulation parameters.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorCategory::config, what) {}
};

// A truncated basis (Fock, dressed or ladder) is too small for the requested run.
class TruncationError : public Error {
public:
    TruncationError(const std::string& what, double time = 0.0, double population = 0.0)
        : Error(ErrorCategory::truncation, what), time_(time), population_(population) {}

    double time() const noexcept { return time_; }
    double population() const noexcept { return population_; }

private:
    double time_;
    double population_;
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ErrorCategory::numerical, what) {}
};

inline const char* category_name(ErrorCategory c) {
    switch (c) {
    case ErrorCategory::config: return "config";
    case ErrorCategory::truncation: return "truncation";
    case ErrorCategory::numerical: return "numerical";
    }
    return "unknown";
}

inline int exit_code(ErrorCategory c) {
    switch (c) {
    case ErrorCategory::config: return 2;
    case ErrorCategory::truncation: return 3;
    case ErrorCategory::numerical: return 4;
    }
    return 1;
}

} // namespace dce
