// Separable rotation of two different species in a tilted double well:
// linear + repulsive-harmonic + quartic external trap whose tilt force
// gamma(t) is chosen so that the mass-weighted Hessian stays diagonal in the
// fixed-tilt frame at every instant.  The separation d solves the
// decoupling-plus-equilibrium constraint; gamma and the midpoint s0 follow
// in closed form.
#pragma once

#include <vector>

#include "ionrot/chain_model.hpp"
#include "ionrot/rotation_ansatz.hpp"
#include "ionrot/sta_designer.hpp"

namespace ionrot {

struct DoubleWellConfig {
  double mw2;  // m_i omega_i^2, shared by both ions; negative (repulsive)
  double beta; // quartic coefficient, > 0
};

struct SeparableGeometry {
  double d;     // um
  double s0;    // um, midpoint
  double A;     // auxiliary 12 beta d^3 s0 - d^2 (u1 - u2)
  double gamma; // tilt force
};

// Solves the decoupled-equilibrium geometry for the instantaneous springs
// u_i.  A warm-start separation keeps the root on one branch along a
// protocol; without one, the bracket is scanned and the branch whose ions
// straddle the trap centre with confined modes is selected.
SeparableGeometry solve_separation(double u1, double u2, double beta,
                                   const IonPair& ions, double d_warm = 0.0,
                                   double cc = internal::coulomb_coupling);

// Warm-started geometry evaluator along a rotation protocol.
class DoubleWellTrack {
public:
  DoubleWellTrack(const DoubleWellConfig& config, const IonPair& ions,
                  const RotationAnsatz& ansatz);

  SeparableGeometry at(double t) const;
  EffectiveSprings springs(double t) const;
  SymMat2 hessian(double t) const;       // mass-weighted, at the geometry
  ModeDecomposition modes(double t) const; // frequencies only (no rates)

  const RotationAnsatz& ansatz() const { return ansatz_; }
  const IonPair& ions() const { return ions_; }
  const DoubleWellConfig& config() const { return config_; }

private:
  DoubleWellConfig config_;
  IonPair ions_;
  RotationAnsatz ansatz_;
  mutable double warm_d_ = 0.0;
};

// Mode drives for the decoupled double well.  Frequencies come from the
// numerical diagonalisation of the Hessian; the momentum shifts follow the
// general tilt-frame formulas evaluated at mu = -pi/4, using fourth-order
// finite differences of (d, s0) with step t_f/2000.
std::pair<ModeDrive, ModeDrive> mode_drives_doublewell(
    const DoubleWellTrack& track);

struct DoubleWellSeries {
  std::vector<double> t, d, s0, gamma, omega_plus, omega_minus;
};
DoubleWellSeries sample_doublewell_series(const DoubleWellTrack& track,
                                          int n_samples = 2000);

// Relative normal-mode excitation (E(t_f) - E(0)) / E(0) for one protocol.
double doublewell_excitation(const DoubleWellTrack& track);

// Optimises the free ansatz coefficients; DesignResult.objective carries
// the relative excitation dE/E0.
DesignResult design_doublewell(const IonPair& ions,
                               const DoubleWellConfig& config, double t_f,
                               double theta_f, int n_free,
                               const DesignOptions& opts = {});

} // namespace ionrot
