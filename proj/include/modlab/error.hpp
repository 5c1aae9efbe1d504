#pragma once

#include <stdexcept>
#include <string>

namespace modlab {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user-facing parameters (config values, exponents, j-ranges).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A numerical gate refused the computation: Nyquist margin, lattice
/// coverage, truncation or refinement checks.
class GateError : public Error {
 public:
  using Error::Error;
};

/// An internal identity check failed (imaginary residue, cache mismatch).
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace modlab
