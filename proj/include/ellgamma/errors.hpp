#pragma once

#include <stdexcept>
#include <string>

namespace ellgamma {

/// Violated precondition or malformed input. The CLI maps this to exit status 2.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class RingMismatch : public ContractError {
 public:
  using ContractError::ContractError;
};

/// A p-adic quantity was needed beyond the digits that are known.
class PrecisionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The coefficient ring lacks the p-power roots of unity a character needs.
class MissingRootsError : public std::runtime_error {
 public:
  MissingRootsError(const std::string& what, int depth)
      : std::runtime_error(what), depth_(depth) {}
  /// Exponent D such that mu_{p^D} would suffice.
  int depth() const noexcept { return depth_; }

 private:
  int depth_;
};

/// A computed check failed: a declared recurrence, a stabilization bound,
/// or a functional-equation comparison.
class VerificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ellgamma
