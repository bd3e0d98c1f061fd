#pragma once

#include <stdexcept>
#include <string>

namespace mmzero {

// Base for every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// A documented precondition was violated by the caller.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace mmzero
