#pragma once

#include <stdexcept>
#include <string>

namespace mwlab {

// Base for all library errors. The CLI maps IoError/ValidationError to exit
// code 2 and anything else to 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

// Raised when a numeric precondition breaks mid-computation (non-finite
// gradients, non-finite loss).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace mwlab
