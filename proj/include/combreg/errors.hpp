#pragma once

#include <stdexcept>
#include <string>

namespace combreg {

/// Input that violates a documented precondition (bad sample, bad config, ...).
/// The CLI maps this to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation that cannot produce a meaningful number on valid input
/// (singular covariance, degenerate projection, ...). CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace combreg
