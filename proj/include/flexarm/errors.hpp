#pragma once

#include <stdexcept>
#include <string>

namespace flexarm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed scenario file, unknown scenario name, bad field values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Structurally invalid gains (asymmetric matrices, non-positive slopes, ...).
class GainError : public Error {
 public:
  using Error::Error;
};

// A stability certificate failed where the caller required it to pass.
class CertificateError : public Error {
 public:
  using Error::Error;
};

// Requested a bound that does not exist (PI law is not saturated).
class UnboundedControlError : public Error {
 public:
  using Error::Error;
};

// Eigen-decomposition failed its residual check.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, double time) : Error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace flexarm
