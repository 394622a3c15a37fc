#pragma once

#include <stdexcept>
#include <string>

namespace amforge {

// Bad configuration or arguments; maps to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input data or failed I/O; maps to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace amforge
