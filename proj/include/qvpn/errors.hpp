#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qvpn {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input document. Carries the 1-based line number when known (0 otherwise).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Well-formed input that violates a domain constraint.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// The LP solver failed to reach a verdict (cycling, NaN, constraint check failure).
class LpNumericalError : public Error {
 public:
  using Error::Error;
};

/// An oracle or brute-force routine was asked to exceed its size guard.
class GuardError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Policy weights became non-finite during training.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace qvpn
