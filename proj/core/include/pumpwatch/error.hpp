#pragma once

#include <stdexcept>
#include <string>

namespace pumpwatch {

// Bad arguments or configuration supplied by the caller. The CLI maps this to
// exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input data that cannot be used: malformed files, market gaps, degenerate
// corpora. The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pumpwatch
