#pragma once

#include <stdexcept>
#include <string>

namespace corelate {

// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unreadable source or malformed file.
class InputError : public Error {
 public:
  using Error::Error;
};

// Bad format tag, bad flag combination.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Data references something that does not exist (e.g. a member id with no
// business record).
class DataError : public Error {
 public:
  using Error::Error;
};

// Lookup of an id that is not in the graph.
class LookupError : public Error {
 public:
  using Error::Error;
};

}  // namespace corelate
