#pragma once

#include <stdexcept>
#include <string>

namespace awb {

/// Malformed or ill-typed input: unknown names, arity or type mismatches,
/// violated preconditions. Always carries a human-readable location/context.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace awb
