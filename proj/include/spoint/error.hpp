#pragma once

#include <stdexcept>
#include <string>

namespace spoint {

// Exit-code contract of the command-line front end:
// 0 success, 1 convention violated, 2 input error, 3 numerical failure.
enum class ExitCode : int {
  kOk = 0,
  kConventionViolated = 1,
  kInputError = 2,
  kNumericalFailure = 3,
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const noexcept { return ExitCode::kNumericalFailure; }
};

/// Malformed configuration, CSV or argument outside an operation's domain.
class InputError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kInputError; }
};

/// The zero-energy operator has (numerically) a nontrivial kernel: either
/// I+K is singular on the grid or the s-wave asymptotic slope vanishes.
class ConventionViolated : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kConventionViolated; }
};

/// A refinement or iteration did not reach its target.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace spoint
