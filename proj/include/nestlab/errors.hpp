#pragma once

#include <stdexcept>
#include <string>

namespace nestlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates an operation's precondition (shape, hermiticity, membership, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A computation could not reach a verdict within its budget (e.g. lattice
/// closure exceeded its cap without a verified witness).
class IndeterminateError : public Error {
 public:
  using Error::Error;
};

/// An internal consistency check failed; indicates loss of accuracy.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace nestlab
