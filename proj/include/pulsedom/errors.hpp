#ifndef PULSEDOM_ERRORS_HPP
#define PULSEDOM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pulsedom {

/// Numerical failure: singular matrices, overflow, lost precision.
class NumericError : public std::runtime_error {
  public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Two supposedly equivalent computations disagree beyond tolerance.
class ConsistencyError : public NumericError {
  public:
    explicit ConsistencyError(const std::string& msg) : NumericError(msg) {}
};

/// An independent oracle failed its own convergence check.
class OracleError : public std::runtime_error {
  public:
    explicit OracleError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Configuration file or flag problem.
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Power-law fit could not be performed on the given rows.
class FitError : public std::runtime_error {
  public:
    explicit FitError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace pulsedom

#endif
