#pragma once

#include <stdexcept>
#include <string>

namespace soergel {

// Raised when an algebraic identity that the theory guarantees fails to
// hold in an actual computation (singular lambda matrix, non-idempotent
// reduction, residual after back-substitution, ...).  CLI maps this to a
// dedicated exit code.
class TheoryError : public std::runtime_error {
 public:
  explicit TheoryError(const std::string& what) : std::runtime_error(what) {}
};

// Bad user input: unknown type label, malformed word, invalid flag combo.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace soergel
