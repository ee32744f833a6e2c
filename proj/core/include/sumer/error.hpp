#pragma once

#include <stdexcept>
#include <string>

namespace sumer {

/// Bad input: a spec, config, or dataset that violates a precondition.
/// The CLI maps this to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Failure while executing a valid request (I/O, numerical breakdown).
/// The CLI maps this to exit code 1.
class RuntimeFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sumer
