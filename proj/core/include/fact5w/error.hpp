#pragma once

#include <stdexcept>
#include <string>

namespace fact5w {

/// Error categories map 1:1 onto CLI exit codes (config=2, data=3, numeric=4).
enum class ErrorCategory { Config, Data, Numeric };

class Error : public std::runtime_error {
  public:
    Error(ErrorCategory category, const std::string& message)
        : std::runtime_error(message), category_(category) {}

    ErrorCategory category() const { return category_; }

  private:
    ErrorCategory category_;
};

/// Bad flags, malformed configuration, incompatible options.
class ConfigError : public Error {
  public:
    explicit ConfigError(const std::string& message) : Error(ErrorCategory::Config, message) {}
};

/// Malformed files, schema violations, join mismatches.
class DataError : public Error {
  public:
    explicit DataError(const std::string& message) : Error(ErrorCategory::Data, message) {}
};

/// Non-finite values, divergence, numeric contract violations.
class NumericError : public Error {
  public:
    explicit NumericError(const std::string& message) : Error(ErrorCategory::Numeric, message) {}
};

} // namespace fact5w
