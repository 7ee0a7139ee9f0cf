#pragma once

#include <stdexcept>
#include <string>

namespace pme {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid arguments or inconsistent inputs (bad mesh kind, negative density, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A linear or nonlinear solve did not succeed.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double last_residual = 0.0)
      : Error(what), last_residual_(last_residual) {}

  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

}  // namespace pme
