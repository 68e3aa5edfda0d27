#pragma once

#include <stdexcept>
#include <string>

namespace nonconc {

// Raised for malformed input: shape mismatches, bad indices, invalid specs.
class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Raised when a computation's precondition fails on otherwise valid input,
// e.g. a singular matrix or a wrong vanishing order.
class DomainError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ValidationError(what);
}

}  // namespace nonconc
