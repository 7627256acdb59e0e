#pragma once

#include <stdexcept>
#include <string>

namespace ifv {

// Caller handed us something outside the documented contract.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A state-space, tensor or event cap would be exceeded.
class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failure (singular solve, residual above tolerance).
class SolveFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The model violates a hypothesis the requested analysis depends on.
class HypothesisViolated : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace ifv
