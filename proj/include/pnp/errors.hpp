#pragma once

#include <stdexcept>
#include <string>

namespace pnp {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input parameters (ranges, sizes, inconsistent arguments).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Geometry that cannot be discretized (empty or disconnected fluid phase).
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Iterative solver failed to reach its tolerance, or broke down.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, int iterations, double residual)
      : Error(what + " (iterations=" + std::to_string(iterations) +
              ", relative residual=" + std::to_string(residual) + ")"),
        iterations_(iterations),
        residual_(residual) {}

  int iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  int iterations_;
  double residual_;
};

/// The pure-Neumann Poisson problem has no solution: net charge plus boundary
/// flux does not integrate to zero.
class CompatibilityError : public Error {
 public:
  CompatibilityError(const std::string& context, double residual);

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// A time step could not be completed even after the allowed dt reductions.
class StepError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent run configuration. The message carries the
/// offending field path, e.g. `species[0].z`.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace pnp
