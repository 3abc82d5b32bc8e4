#pragma once

#include <stdexcept>
#include <string>

namespace speechgrade {

// Error categories map 1:1 onto CLI exit codes: validation/format -> 1,
// I/O -> 2, numeric failure -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace speechgrade
