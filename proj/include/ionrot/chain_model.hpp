// Static and instantaneous-time mechanics of the two-ion chain in the
// rotating frame: effective spring constants, equilibrium geometry, Hessian
// in mass-weighted coordinates, tilt angle, dynamical normal-mode
// frequencies and momentum shifts.
#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "ionrot/constants.hpp"

namespace ionrot {

// Two singly charged ions; ion 1 occupies s1 < s2.
struct IonPair {
  double m1; // u
  double m2; // u
};

struct RigidHarmonicTrap {
  double k; // u / us^2 (force per length)
};

// u_i = k - m_i theta_dot^2.  Negative values mean the rotating-frame
// harmonic part no longer confines that ion.
struct EffectiveSprings {
  double u1;
  double u2;
};

struct ChainGeometry {
  double s1; // um, < 0
  double s2; // um, > 0
  double d;  // um, s2 - s1
};

struct SymMat2 {
  double v11;
  double v12;
  double v22;
};

struct ModeDecomposition {
  double mu;             // tilt angle, rad
  double omega_plus_sq;  // rad^2/us^2; can be negative
  double omega_minus_sq;
  SymMat2 v;
  double p0_plus;  // sqrt(u) um / us
  double p0_minus;
};

EffectiveSprings effective_springs(const RigidHarmonicTrap& trap,
                                   const IonPair& ions, double theta_dot);

// Closed-form equilibrium of the rigid harmonic trap + Coulomb repulsion.
// Requires u1 > 0 and u2 > 0.
ChainGeometry equilibrium_harmonic(const EffectiveSprings& springs,
                                   double cc = internal::coulomb_coupling);

// Mass-weighted Hessian at the given geometry.
SymMat2 hessian_harmonic(const EffectiveSprings& springs, const IonPair& ions,
                         const ChainGeometry& geom,
                         double cc = internal::coulomb_coupling);

// Diagonalises the mass-weighted Hessian.  The tilt branch is the principal
// value 2 mu in (-pi/2, pi/2]; a degenerate diagonal with v12 < 0 selects
// mu = -pi/4 (the equal-ion convention).  If prev_mu is given, mu is shifted
// by multiples of pi/2 to the branch nearest the previous sample, keeping
// mode labels continuous along a time series.
ModeDecomposition mode_decomposition(const SymMat2& v, const IonPair& ions,
                                     double s1_eq_dot = 0.0,
                                     double s2_eq_dot = 0.0,
                                     std::optional<double> prev_mu = {});

// Tilt angle against rotation speed; non-constant output for unequal masses
// is the obstruction to separability in a rigid trap.
std::vector<double> separability_drift(const RigidHarmonicTrap& trap,
                                       const IonPair& ions,
                                       const std::vector<double>& theta_dots,
                                       double cc = internal::coulomb_coupling);

// Magnetic-to-electric force ratio r^2 theta_dot^2 / (4 c^2) for two charges
// revolving at radius ~ r/2.  All arguments in internal units.
double magnetic_electric_ratio(double r, double theta_dot);

// Eigenvalues of a symmetric 2x2 matrix, descending.
std::pair<double, double> sym2_eigenvalues(const SymMat2& v);

// Fourth-order first derivative of f at t with step h, stencil shifted to
// stay inside [lo, hi].
double deriv4(const std::function<double(double)>& f, double t, double h,
              double lo, double hi);

} // namespace ionrot
