#pragma once

#include <stdexcept>
#include <string>

namespace fastpd {

// Base class of everything thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid user input: malformed documents, dimension mismatches, bad
// arguments. The CLI maps these to exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Malformed or unsupported model/data documents.
class ParseError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Refused because a configured resource budget would be exceeded
// (e.g. the per-tree partition-list limit). The CLI maps this to exit code 3.
class BudgetError : public Error {
 public:
  using Error::Error;
};

}  // namespace fastpd
