// Full two-particle quantum dynamics on an (s1, s2) grid: imaginary-time
// ground state and Strang split-operator propagation under the exact
// rotating-frame potential, with FFT-based kinetic steps.
#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "ionrot/chain_model.hpp"
#include "ionrot/rotation_ansatz.hpp"

namespace ionrot {

struct Grid2D {
  int n1 = 0, n2 = 0;           // point counts, powers of two
  double s1_min = 0, s1_max = 0; // um
  double s2_min = 0, s2_max = 0;
  double ds1 = 0, ds2 = 0;

  static Grid2D make(int n1, int n2, double s1_min, double s1_max,
                     double s2_min, double s2_max);

  double s1(int i) const { return s1_min + i * ds1; }
  double s2(int j) const { return s2_min + j * ds2; }
  std::size_t size() const {
    return static_cast<std::size_t>(n1) * static_cast<std::size_t>(n2);
  }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * n2 + j;
  }
  double cell() const { return ds1 * ds2; }
};

struct Wavefunction2D {
  Grid2D grid;
  std::vector<std::complex<double>> amp; // row-major, s1-major

  double norm() const;            // integral of |psi|^2
  void normalize();
  double mean_s1() const;
  double mean_s2() const;
};

struct RigidHarmonicSpec {
  double k; // u/us^2
};

// Linear + repulsive-harmonic + quartic external trap; the per-ion springs
// and the tilt force may vary in time.
struct TiltedDoubleWellSpec {
  std::function<double(double)> u1;
  std::function<double(double)> u2;
  std::function<double(double)> gamma;
  double beta;
};

struct PotentialModel {
  std::variant<RigidHarmonicSpec, TiltedDoubleWellSpec> trap;
  double m1 = 0, m2 = 0;
  double cc = internal::coulomb_coupling;
  std::function<double(double)> theta_dot; // rad/us; may be null (static)
  double clamp_eps = 0.0; // Coulomb denominator floor; (d at t=0)/50 if 0
  double s0_hint = 0.0;   // midpoint guess for non-harmonic equilibria

  static PotentialModel rigid(const RigidHarmonicTrap& trap,
                              const IonPair& ions,
                              std::function<double(double)> theta_dot = {});
  static PotentialModel double_well(TiltedDoubleWellSpec spec,
                                    const IonPair& ions, double d0,
                                    std::function<double(double)> theta_dot = {},
                                    double s0_hint = 0.0);

  // Quadratic/linear/quartic external coefficients at time t, with the
  // centrifugal term folded into the per-ion springs.
  void coefficients_at(double t, bool zero_rotation, double& q1, double& q2,
                       double& lin, double& quart) const;
  double theta_dot_at(double t) const;
  // Equilibrium separation of the t=0 potential (used for the clamp).
  double d0() const;

private:
  double d0_cached_ = 0.0;
};

// Total potential; the Coulomb term uses max(s2 - s1, clamp_eps).
double potential_at(const PotentialModel& model, double s1, double s2,
                    double t, bool zero_rotation = false);

struct SimConfig {
  int n1 = 256, n2 = 256;
  double margin_sigmas = 6.0;   // grid margin in ground-state widths
  double drift_cap = 0.5;       // cap equilibrium drift at this fraction of d0
  double dt_override = 0.0;     // 0: use the step policy
  int time_samples = 129;       // observable records per propagation
  double edge_threshold = 1e-8; // max |psi|^2 weight at edges / clamp band
  bool soft_bands = false;      // report band weights instead of throwing
  int steps_cap_imaginary = 60000;
  double imag_dtau_factor = 0.02; // dtau = factor / omega_ref
};

// Grid construction per the margin rule: the (clamped) equilibrium
// trajectory of each ion plus margin_sigmas ground-state widths.
Grid2D make_grid(const PotentialModel& model, const RotationAnsatz& protocol,
                 const SimConfig& cfg);
Grid2D make_grid_static(const PotentialModel& model, const SimConfig& cfg);

// dt = min(t_f/4000, 2pi/(100 W+max), hbar pi/(4 Tmax)).
double step_policy(const PotentialModel& model, const RotationAnsatz& protocol,
                   const Grid2D& grid);

struct GroundStateResult {
  Wavefunction2D psi;
  double energy = 0.0;
  int steps = 0;
  std::vector<double> energy_trace;
};

GroundStateResult ground_state(const PotentialModel& model, const Grid2D& grid,
                               const SimConfig& cfg = {});

struct Observables {
  std::vector<double> t;
  std::vector<double> norm;
  std::vector<double> energy;  // <H(t)> with the instantaneous potential
  std::vector<double> mean_s1;
  std::vector<double> mean_s2;
};

struct PropagationResult {
  Wavefunction2D psi;
  Observables obs;
  double energy_initial = 0.0; // <H(0)>, static trap
  double energy_final = 0.0;   // <H(t_f)> evaluated at theta_dot = 0
  double excess_energy = 0.0;
  int steps = 0;
  double dt = 0.0;
  double norm_drift = 0.0;
  double edge_weight = 0.0;  // worst checkpoint value
  double clamp_weight = 0.0;
};

PropagationResult propagate(const PotentialModel& model,
                            const Wavefunction2D& psi0,
                            const RotationAnsatz& protocol,
                            const SimConfig& cfg = {});

double excess_energy(const PropagationResult& run);

// <psi|H|psi> with the potential at time t (zero_rotation replaces
// theta_dot by 0).
double energy_expectation(const PotentialModel& model,
                          const Wavefunction2D& psi, double t,
                          bool zero_rotation = false);

// Integrated |psi|^2 over the outermost two grid rows/columns, and over the
// band where the ions are closer than the Coulomb clamp.  Both must stay
// negligible for a propagation to be trustworthy.
double edge_band_weight(const Wavefunction2D& psi);
double clamp_band_weight(const Wavefunction2D& psi, double clamp_eps);

// Flat little-endian re/im binary dump with a JSON grid sidecar.
void dump_wavefunction(const Wavefunction2D& psi, const std::string& path_bin,
                       const std::string& path_json);

} // namespace ionrot
