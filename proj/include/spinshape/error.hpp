#pragma once

#include <stdexcept>
#include <string>

namespace spinshape {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation (non-finite input,
// series evaluated outside its disc, pole of a Pochhammer denominator, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Requested level or parameter set violates the normalizability condition
// gamma_n > |beta_n|/2, or the parameter flow left gamma_k > 0.
class InadmissibleError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Spinor fields or operators defined on incompatible grids.
class GridMismatch : public Error {
 public:
  using Error::Error;
};

// Eigensolver or integrator could not produce a trustworthy result.
class SolverError : public Error {
 public:
  using Error::Error;
};

// Two vectors that should span a two-dimensional space became dependent.
class DegeneracyCollapse : public SolverError {
 public:
  using SolverError::SolverError;
};

// Invalid run configuration. `field` names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace spinshape
