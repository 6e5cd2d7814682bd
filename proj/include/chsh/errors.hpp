#pragma once

#include <stdexcept>
#include <string>

namespace chsh {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An input violates a structural or numerical invariant (CLI exit code 2).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class NotHermitian : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DimensionMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class OutcomeOutOfRange : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// The conditioning event "both outcomes non-null" has (numerically) zero
/// probability, so the conditioned expectation is undefined (CLI exit code 3).
class DegeneratePostSelection : public Error {
 public:
  DegeneratePostSelection(std::string pair, double pass_probability)
      : Error("degenerate post-selection on pair " + pair +
              ": pass probability " + std::to_string(pass_probability)),
        pair_(std::move(pair)),
        pass_probability_(pass_probability) {}

  const std::string& pair() const noexcept { return pair_; }
  double pass_probability() const noexcept { return pass_probability_; }

 private:
  std::string pair_;
  double pass_probability_;
};

}  // namespace chsh
