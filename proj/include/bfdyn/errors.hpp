#pragma once

#include <stdexcept>
#include <string>

namespace bfdyn {

// Invalid user input: bad dimension, malformed potential table, config errors.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A basis or dense oracle would exceed its configured size limit.
class DimensionLimitError : public std::length_error {
 public:
  DimensionLimitError(const std::string& what, double requested)
      : std::length_error(what), requested_(requested) {}
  double requested() const noexcept { return requested_; }

 private:
  double requested_;
};

// Two objects tagged with different bases were combined.
class BasisMismatchError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// An assembled operator failed its Hermiticity certificate.
class HermiticityError : public std::runtime_error {
 public:
  HermiticityError(const std::string& what, double deviation)
      : std::runtime_error(what), deviation_(deviation) {}
  double deviation() const noexcept { return deviation_; }

 private:
  double deviation_;
};

// Krylov propagation did not reach the requested accuracy within its budget.
class PropagationError : public std::runtime_error {
 public:
  PropagationError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace bfdyn
