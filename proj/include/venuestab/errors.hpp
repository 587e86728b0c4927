#pragma once

#include <stdexcept>
#include <string>

namespace venuestab {

// Base for all toolkit errors. `code()` is a short machine-parsable tag
// that the CLI prints as part of its one-line error output.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& message) : Error("parse", message) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message) : Error("validation", message) {}
};

class EligibilityError : public Error {
 public:
  explicit EligibilityError(const std::string& message) : Error("eligibility", message) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error("config", message) {}
};

class ConvergenceError : public Error {
 public:
  explicit ConvergenceError(const std::string& message) : Error("convergence", message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("io", message) {}
};

}  // namespace venuestab
