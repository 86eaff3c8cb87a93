#pragma once

#include <stdexcept>
#include <string>

namespace fraisse {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a structural invariant (asymmetry, distance out of range, bad file).
class MalformedSpace : public Error {
 public:
  using Error::Error;
};

/// Operation called outside its documented domain.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Exactly valid input that is too degenerate for double precision.
class PrecisionError : public Error {
 public:
  using Error::Error;
};

/// A randomized or snapping search ran out of retries.
class SearchFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace fraisse
