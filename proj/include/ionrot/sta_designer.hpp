// Invariant-based inverse engineering for separable rotations: Ermakov and
// Newton auxiliary equations, mode energies, invariant eigen-solutions, and
// coefficient optimisation over the rotation ansatz.  Also hosts the direct
// optimisation mode where each objective evaluation runs the full
// two-particle quantum propagation.
#pragma once

#include <array>
#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "ionrot/chain_model.hpp"
#include "ionrot/nelder_mead.hpp"
#include "ionrot/rotation_ansatz.hpp"

namespace ionrot {

struct SimConfig; // quantum_verifier.hpp

// Auxiliary variables of one dynamical normal mode.
struct ModeState {
  double b = 1.0;       // wavefunction scaling, > 0
  double b_dot = 0.0;   // 1/us
  double alpha = 0.0;   // sqrt(u) um
  double alpha_dot = 0.0;
};

// Time-dependent drive of one mode: frequency squared and momentum-shift rate.
struct ModeDrive {
  std::function<double(double)> omega_sq;
  std::function<double(double)> p0_dot;
  double omega0_sq = 0.0; // omega_sq at t = 0; must be positive
};

struct AuxTrajectory {
  std::vector<double> t;
  std::vector<ModeState> states;
  const ModeState& final_state() const { return states.back(); }
};

// Integrates b'' + W^2(t) b = W0^2/b^3 and a'' + W^2(t) a = p0_dot(t) from
// b(0)=1, b'(0)=0, a(0)=a'(0)=0 with an adaptive RK5(4) (rel 1e-10, abs
// 1e-12), reporting the state at the requested times.  Intervals with
// W^2 < 0 need no special handling.
AuxTrajectory solve_auxiliary(const ModeDrive& drive, double t_f,
                              std::span<const double> sample_times);
AuxTrajectory solve_auxiliary(const ModeDrive& drive, double t_f,
                              int n_samples = 2);

// Average energy of the n-th elementary solution at one instant.  The
// completed-square transport term switches to its expanded form when
// |omega_sq| is vanishingly small against omega0_sq.
double mode_energy(int n, const ModeState& state, double omega_sq,
                   double p0_dot, double omega0_sq);

// Invariant eigen-solution on a 1D mode-coordinate grid (global phase
// omitted).  Throws ResolutionError when the grid misses more than 1e-6 of
// the norm.
std::vector<std::complex<double>>
build_elementary_solution(int n, const ModeState& state, double omega0,
                          std::span<const double> grid);

// Dynamical invariant evaluated on a classical phase-space sample (s, p).
double invariant_value(const ModeState& state, double s, double p,
                       double omega0_sq);

struct DesignResult {
  std::array<double, 4> coefficients{};  // c3..c6, trailing zeros
  double objective = 0.0;                // summed final excess mode energy
  std::array<double, 2> mode_energies_final{}; // E''_{0,+}, E''_{0,-}
  std::vector<double> trace;             // best-so-far objective per iteration
  bool converged = false;
  long evals = 0;
  bool warning_not_converged = false;
};

struct DesignOptions {
  int max_iter = 2000;
  long max_evals = -1;
  int restarts = 0;
  std::uint64_t seed = 0;
  double initial_step = 0.0; // 0: per-mode default (1e-3 normal-mode, 1e-2 direct)
  std::optional<std::array<double, 4>> start; // seed coefficients
};

// Equal-ion drives: W+^2 = 3 w^2, W-^2 = w^2 with w^2 = w0^2 - theta_dot^2,
// p0dot_+ = -sqrt(m/2) x0'' via the analytic chain rule, p0dot_- = 0.
std::pair<ModeDrive, ModeDrive>
equal_ion_drives(const IonPair& ions, double omega0,
                 const RotationAnsatz& ansatz);

// Minimises the summed final mode excitation over the free ansatz
// coefficients for two equal ions.
DesignResult design_equal_ions(const IonPair& ions, double omega0, double t_f,
                               double theta_f, int n_free,
                               const DesignOptions& opts = {});

// Direct mode: each objective evaluation propagates the full two-particle
// wavefunction from the trap ground state and measures the excess energy.
DesignResult design_direct(const IonPair& ions, const RigidHarmonicTrap& trap,
                           double t_f, double theta_f, int n_free,
                           const SimConfig& sim,
                           const DesignOptions& opts = {});

// Objective recomputation for a fixed coefficient set (validation hook).
double equal_ion_objective(const IonPair& ions, double omega0,
                           const RotationAnsatz& ansatz,
                           std::array<double, 2>* mode_energies = nullptr);

} // namespace ionrot
