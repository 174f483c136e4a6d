#pragma once

#include <stdexcept>
#include <string>

namespace h2dyn {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid grid, pulse or run parameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// API misuse, e.g. transforming an axis that is already in momentum space.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Iterative solver did not meet its tolerance within the iteration cap.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_energy, double residual)
      : Error(what), last_energy_(last_energy), residual_(residual) {}
  double last_energy() const noexcept { return last_energy_; }
  double residual() const noexcept { return residual_; }

 private:
  double last_energy_;
  double residual_;
};

/// Calibration target not reachable inside the search bracket.
class CalibrationError : public Error {
 public:
  CalibrationError(const std::string& what, double knot)
      : Error(what), knot_(knot) {}
  double knot() const noexcept { return knot_; }

 private:
  double knot_;
};

/// Norm growth during propagation; usually means the time step is too large.
class StabilityError : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration text. Carries the offending key and line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::string key, int line)
      : Error(what), key_(std::move(key)), line_(line) {}
  const std::string& key() const noexcept { return key_; }
  int line() const noexcept { return line_; }

 private:
  std::string key_;
  int line_;
};

/// File missing, truncated, or with a bad header.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Run directory without a complete manifest.
class IncompleteRunError : public IoError {
 public:
  using IoError::IoError;
};

/// Checkpoint belongs to a different configuration.
class DigestMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace h2dyn
