#pragma once

#include <stdexcept>
#include <string>

namespace snl {

// Bad arguments, malformed files, violated preconditions. CLI exit code 1.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Divergence, rank collapse, solver failure. CLI exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace snl
