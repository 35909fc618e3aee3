// Physical constants (CODATA 2018) and the internal unit system.
//
// Internal units: mass in atomic mass units, length in micrometres, time in
// microseconds.  MHz-scale traps, micrometre separations and microsecond
// protocols then map to O(1)-O(1e5) numbers in double precision.
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace ionrot {

namespace codata {
inline constexpr double elementary_charge = 1.602176634e-19;    // C, exact
inline constexpr double vacuum_permittivity = 8.8541878128e-12; // F/m
inline constexpr double vacuum_permeability = 1.25663706212e-6; // H/m
inline constexpr double speed_of_light = 2.99792458e8;          // m/s, exact
inline constexpr double reduced_planck = 1.054571817e-34;       // J s
inline constexpr double atomic_mass_unit = 1.66053906660e-27;   // kg
} // namespace codata

// Coulomb coupling Cc = e^2 / (4 pi eps0) in SI (N m^2).
inline double coulomb_coupling_si() {
  return codata::elementary_charge * codata::elementary_charge /
         (4.0 * M_PI * codata::vacuum_permittivity);
}

enum class Dimension {
  mass,              // kg        -> u
  length,            // m         -> um
  time,              // s         -> us
  energy,            // J         -> u um^2 / us^2
  spring_constant,   // N/m       -> u / us^2
  angular_frequency, // rad/s     -> rad/us
  frequency,         // 1/s       -> 1/us
  action,            // J s       -> u um^2 / us
  force,             // N         -> u um / us^2
  quartic_coefficient, // N/m^3   -> u / (um^2 us^2)
  coulomb_coupling,  // N m^2     -> u um^3 / us^2
  velocity,          // m/s       -> um/us (factor 1)
};

Dimension dimension_from_string(const std::string& tag);

// Linear rescale between SI and internal units.  Conversions round-trip to
// relative 1e-12 (they are single multiplications).
class UnitSystem {
public:
  static double factor_to_internal(Dimension d) {
    constexpr double u = codata::atomic_mass_unit;
    switch (d) {
      case Dimension::mass: return 1.0 / u;
      case Dimension::length: return 1e6;
      case Dimension::time: return 1e6;
      case Dimension::energy: return 1.0 / u;
      case Dimension::spring_constant: return 1.0 / (u * 1e12);
      case Dimension::angular_frequency: return 1e-6;
      case Dimension::frequency: return 1e-6;
      case Dimension::action: return 1.0 / (u * 1e-6);
      case Dimension::force: return 1.0 / (u * 1e6);
      case Dimension::quartic_coefficient: return 1.0 / (u * 1e24);
      case Dimension::coulomb_coupling: return 1.0 / (u * 1e-6);
      case Dimension::velocity: return 1.0;
    }
    throw std::invalid_argument("unknown dimension tag");
  }

  static double to_internal(double si_value, Dimension d) {
    return si_value * factor_to_internal(d);
  }
  static double to_si(double internal_value, Dimension d) {
    return internal_value / factor_to_internal(d);
  }
};

// Frequently used constants pre-converted to internal units.
namespace internal {
inline const double hbar =
    UnitSystem::to_internal(codata::reduced_planck, Dimension::action);
inline const double coulomb_coupling =
    UnitSystem::to_internal(coulomb_coupling_si(), Dimension::coulomb_coupling);
inline const double speed_of_light =
    UnitSystem::to_internal(codata::speed_of_light, Dimension::velocity);
} // namespace internal

} // namespace ionrot
