#pragma once

#include <stdexcept>
#include <string>

namespace weakdep {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller violated a documented precondition (bad parameter, window too short).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Long-run variance or E S_n^2 is not strictly positive.
class DegenerateVarianceError : public Error {
 public:
  using Error::Error;
};

// Operation not available for the given model variant.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// Two routes to the same exact quantity disagree.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace weakdep
