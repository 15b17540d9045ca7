#pragma once

#include <stdexcept>
#include <string>

namespace gkd {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-domain input (bad dimensions, unphysical parameters...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A covariance handed to a sampler had a clearly negative eigenvalue.
class NotPSD : public Error {
 public:
  using Error::Error;
};

/// Matrix too close to singular for the requested decomposition.
class IllConditioned : public Error {
 public:
  using Error::Error;
};

/// Parameters sit on a pole of a closed-form expression.
class DegenerateParams : public Error {
 public:
  using Error::Error;
};

/// An objective returned a non-finite value.
class EvaluationError : public Error {
 public:
  EvaluationError(const std::string& what, double at) : Error(what), x(at) {}
  double x;
};

class GridTooSmall : public Error {
 public:
  using Error::Error;
};

class OutcomeUnlikely : public Error {
 public:
  using Error::Error;
};

}  // namespace gkd
