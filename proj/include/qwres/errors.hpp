#pragma once

#include <stdexcept>
#include <string>

namespace qwres {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An input violates a documented precondition (bad coin, out-of-range
/// parameter, malformed state). Raised before any numerical work starts.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure could not deliver a trustworthy answer
/// (non-integer winding, a zero sitting on a contour, failed convergence).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A document (coin JSON, run config) is malformed or has unknown keys.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace qwres
