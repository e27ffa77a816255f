#pragma once

#include <stdexcept>
#include <string>

namespace ddbh {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Adaptive step size fell below the representable minimum.
class StiffnessError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// Fock-space truncation too small: the top levels carry population.
class TruncationError : public Error {
 public:
  TruncationError(const std::string& what, int suggested_dim)
      : Error(what), suggested_dim_(suggested_dim) {}
  int suggested_dim() const noexcept { return suggested_dim_; }

 private:
  int suggested_dim_;
};

class DegeneracyError : public Error {
 public:
  using Error::Error;
};

/// det H(k) passes through (or too close to) zero on the Brillouin zone.
class GapClosingError : public Error {
 public:
  using Error::Error;
};

class SingularityError : public Error {
 public:
  using Error::Error;
};

class StabilityError : public Error {
 public:
  using Error::Error;
};

class ResolutionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace ddbh
