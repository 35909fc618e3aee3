#pragma once

#include <stdexcept>
#include <string>

namespace ionrot {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Effective springs are non-confining; the harmonic equilibrium does not exist.
struct EquilibriumUndefined : Error {
  using Error::Error;
};

// Ion separation d <= 0 or otherwise unusable geometry.
struct DegenerateGeometry : Error {
  using Error::Error;
};

// Adaptive ODE integration could not proceed (step underflow, b -> 0, ...).
struct IntegratorFailure : Error {
  IntegratorFailure(const std::string& what, double t)
      : Error(what), time(t) {}
  double time;
};

// Grid or time step cannot represent the state (norm deficit, edge leak, ...).
struct ResolutionError : Error {
  using Error::Error;
};

// No decoupled double-well geometry for the requested configuration.
struct InfeasibleConfiguration : Error {
  using Error::Error;
};

// A geometry sample violated the decoupling condition beyond tolerance.
struct InconsistentGeometry : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

} // namespace ionrot
