#pragma once

#include <stdexcept>
#include <string>

namespace qmg {

/// Base of every error thrown by the library. The CLI maps subclasses to
/// exit codes: ContractViolation/InvalidParameter -> 3, the rest -> 4.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on argument shapes was broken (length mismatch, empty input).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// A numeric parameter is outside its admissible range.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// Operation requires an L2-normalizable state but got a delta/discrete one.
class ImproperState : public Error {
 public:
  using Error::Error;
};

class DegenerateState : public Error {
 public:
  using Error::Error;
};

/// Strategy is in the demand (q) picture where the supply (p) picture was
/// required, or vice versa.
class RepresentationMismatch : public Error {
 public:
  using Error::Error;
};

class BracketingError : public Error {
 public:
  using Error::Error;
};

class DegenerateDensity : public Error {
 public:
  using Error::Error;
};

/// Hermite-basis truncation could not capture the state norm.
class TruncationError : public Error {
 public:
  using Error::Error;
};

/// A check whose hypotheses do not hold for the given input (for example
/// the Vickrey incentive property on a giffen measure).
class NotApplicable : public Error {
 public:
  using Error::Error;
};

}  // namespace qmg
