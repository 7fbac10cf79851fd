#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace flrw {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Time outside the life span [0, T0) or another out-of-domain argument.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A model hypothesis failed. Carries every violated inequality.
class HypothesisError : public Error {
 public:
  explicit HypothesisError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

// Caller asked for something the inputs cannot support (refusal, not a bug).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

}  // namespace flrw
