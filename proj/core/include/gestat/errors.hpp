#pragma once

#include <stdexcept>
#include <string>

namespace gestat {

/// Input outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A quantity that must be finite came out as NaN or infinity.
class NonFinite : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative solver exhausted its budget.
class NoConvergence : public std::runtime_error {
 public:
  NoConvergence(const std::string& what, double last_residual)
      : std::runtime_error(what), last_residual_(last_residual) {}
  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

/// The critical line has no crossing in [0, 1] at the requested point.
class NoRoot : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gestat
