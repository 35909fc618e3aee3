#include "ionrot/sta_designer.hpp"

#include <boost/numeric/odeint.hpp>
#include <cmath>

#include "ionrot/errors.hpp"
#include "ionrot/quantum_verifier.hpp"

namespace ionrot {

namespace {

using AuxState = std::array<double, 4>; // b, b', alpha, alpha'

double clamp(double t, double lo, double hi) {
  return t < lo ? lo : (t > hi ? hi : t);
}

} // namespace

AuxTrajectory solve_auxiliary(const ModeDrive& drive, double t_f,
                              std::span<const double> sample_times) {
  namespace ode = boost::numeric::odeint;
  if (!(drive.omega0_sq > 0.0))
    throw Error("solve_auxiliary: omega0_sq must be positive");

  double t_last = 0.0;
  auto rhs = [&](const AuxState& y, AuxState& dydt, double t) {
    t_last = t;
    const double b = y[0];
    if (!(b > 0.0) || !std::isfinite(b))
      throw IntegratorFailure("solve_auxiliary: b left (0, inf)", t);
    const double tc = clamp(t, 0.0, t_f);
    const double w2 = drive.omega_sq(tc);
    dydt[0] = y[1];
    dydt[1] = -w2 * b + drive.omega0_sq / (b * b * b);
    dydt[2] = y[3];
    dydt[3] = -w2 * y[2] + (drive.p0_dot ? drive.p0_dot(tc) : 0.0);
  };

  AuxTrajectory traj;
  traj.t.assign(sample_times.begin(), sample_times.end());
  traj.states.reserve(traj.t.size());
  auto observer = [&](const AuxState& y, double /*t*/) {
    traj.states.push_back({y[0], y[1], y[2], y[3]});
  };

  AuxState y{1.0, 0.0, 0.0, 0.0};
  auto stepper =
      ode::make_controlled<ode::runge_kutta_dopri5<AuxState>>(1e-12, 1e-10);
  try {
    ode::integrate_times(stepper, rhs, y, traj.t.begin(), traj.t.end(),
                         t_f / 1000.0, observer);
  } catch (const IntegratorFailure&) {
    throw;
  } catch (const std::exception& e) {
    throw IntegratorFailure(std::string("solve_auxiliary: ") + e.what(),
                            t_last);
  }
  return traj;
}

AuxTrajectory solve_auxiliary(const ModeDrive& drive, double t_f,
                              int n_samples) {
  if (n_samples < 2) n_samples = 2;
  std::vector<double> ts(n_samples);
  for (int i = 0; i < n_samples; ++i)
    ts[i] = t_f * static_cast<double>(i) / (n_samples - 1);
  return solve_auxiliary(drive, t_f, ts);
}

double mode_energy(int n, const ModeState& st, double omega_sq, double p0_dot,
                   double omega0_sq) {
  if (!(st.b > 0.0)) throw Error("mode_energy: b must be positive");
  if (!(omega0_sq > 0.0)) throw Error("mode_energy: omega0_sq must be positive");
  const double hbar = internal::hbar;
  const double omega0 = std::sqrt(omega0_sq);
  const double b = st.b, bd = st.b_dot, a = st.alpha, ad = st.alpha_dot;
  double e = (2 * n + 1) * hbar / (4.0 * omega0) *
             (bd * bd + omega_sq * b * b + omega0_sq / (b * b));
  e += 0.5 * ad * ad;
  if (std::abs(omega_sq) >= 1e-12 * omega0_sq) {
    const double shift = a - p0_dot / omega_sq;
    e += 0.5 * omega_sq * shift * shift;
  } else if (p0_dot != 0.0) {
    e += 0.5 * omega_sq * a * a - a * p0_dot +
         p0_dot * p0_dot / (2.0 * omega_sq);
  } else {
    e += 0.5 * omega_sq * a * a;
  }
  return e;
}

std::vector<std::complex<double>>
build_elementary_solution(int n, const ModeState& st, double omega0,
                          std::span<const double> grid) {
  if (!(st.b > 0.0))
    throw Error("build_elementary_solution: b must be positive");
  if (grid.size() < 2)
    throw Error("build_elementary_solution: grid too small");
  const double hbar = internal::hbar;
  const double b = st.b, bd = st.b_dot, a = st.alpha, ad = st.alpha_dot;
  const double xi_scale = std::sqrt(omega0 / hbar);
  const double norm0 = std::pow(omega0 / (M_PI * hbar), 0.25);
  double fact = 1.0;
  for (int k = 2; k <= n; ++k) fact *= k;
  const double hermite_norm = 1.0 / std::sqrt(std::pow(2.0, n) * fact);

  std::vector<std::complex<double>> psi(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double s = grid[i];
    const double sigma = (s - a) / b;
    const double xi = sigma * xi_scale;
    // physicists' Hermite polynomial by recurrence
    double h0 = 1.0, h1 = 2.0 * xi, hn = (n == 0) ? 1.0 : h1;
    for (int k = 2; k <= n; ++k) {
      hn = 2.0 * xi * h1 - 2.0 * (k - 1) * h0;
      h0 = h1;
      h1 = hn;
    }
    const double phi = norm0 * hermite_norm * hn * std::exp(-0.5 * xi * xi);
    const double phase =
        (bd * s * s / (2.0 * b) + (ad * b - a * bd) * s / b) / hbar;
    psi[i] = std::polar(phi / std::sqrt(b), phase);
  }
  const double ds = grid[1] - grid[0];
  double norm = 0.0;
  for (const auto& z : psi) norm += std::norm(z);
  norm *= ds;
  if (std::abs(norm - 1.0) > 1e-6)
    throw ResolutionError(
        "build_elementary_solution: grid misses part of the state (norm " +
        std::to_string(norm) + ")");
  return psi;
}

double invariant_value(const ModeState& st, double s, double p,
                       double omega0_sq) {
  if (!(st.b > 0.0)) throw Error("invariant_value: b must be positive");
  const double u = s - st.alpha;
  const double w = st.b * (p - st.alpha_dot) - st.b_dot * u;
  const double v = u / st.b;
  return 0.5 * w * w + 0.5 * omega0_sq * v * v;
}

std::pair<ModeDrive, ModeDrive>
equal_ion_drives(const IonPair& ions, double omega0,
                 const RotationAnsatz& ansatz) {
  if (ions.m1 != ions.m2)
    throw Error("equal_ion_drives: masses must be equal");
  const double m = ions.m1;
  const double w02 = omega0 * omega0;
  const double cc = internal::coulomb_coupling;

  auto w2_of = [ansatz, w02](double t) {
    const double td = ansatz.theta_dot(t);
    return w02 - td * td;
  };

  ModeDrive plus;
  plus.omega0_sq = 3.0 * w02;
  plus.omega_sq = [w2_of](double t) { return 3.0 * w2_of(t); };
  plus.p0_dot = [ansatz, w2_of, m, cc](double t) {
    const double w = w2_of(t);
    if (!(w > 0.0))
      throw EquilibriumUndefined(
          "equal_ion_drives: effective frequency inverted (w^2 <= 0)");
    const double td = ansatz.theta_dot(t);
    const double tdd = ansatz.theta_ddot(t);
    const double tddd = ansatz.theta_dddot(t);
    const double wd = -2.0 * td * tdd;
    const double wdd = -2.0 * (tdd * tdd + td * tddd);
    const double x0 = std::cbrt(2.0 * cc / (m * w));
    const double xdd =
        -(1.0 / 3.0) * x0 * (wdd / w - (4.0 / 3.0) * (wd / w) * (wd / w));
    return -std::sqrt(m / 2.0) * xdd;
  };

  ModeDrive minus;
  minus.omega0_sq = w02;
  minus.omega_sq = w2_of;
  minus.p0_dot = {};
  return {plus, minus};
}

double equal_ion_objective(const IonPair& ions, double omega0,
                           const RotationAnsatz& ansatz,
                           std::array<double, 2>* mode_energies) {
  const auto [plus, minus] = equal_ion_drives(ions, omega0, ansatz);
  const double tf = ansatz.t_f();
  const auto trj_p = solve_auxiliary(plus, tf);
  const auto trj_m = solve_auxiliary(minus, tf);
  const double hbar = internal::hbar;
  const double ep = mode_energy(0, trj_p.final_state(), plus.omega_sq(tf),
                                plus.p0_dot(tf), plus.omega0_sq);
  const double em = mode_energy(0, trj_m.final_state(), minus.omega_sq(tf),
                                0.0, minus.omega0_sq);
  if (mode_energies) (*mode_energies) = {ep, em};
  return (ep - hbar * std::sqrt(plus.omega0_sq) / 2.0) +
         (em - hbar * std::sqrt(minus.omega0_sq) / 2.0);
}

namespace {

DesignResult optimize_coefficients(
    const std::function<double(const std::array<double, 4>&)>& objective,
    double theta_f, double t_f, int n_free, double initial_step,
    double ftol_abs, const DesignOptions& opts, double penalty) {
  (void)theta_f;
  (void)t_f;
  DesignResult res;
  auto guarded = [&](std::span<const double> x) {
    std::array<double, 4> c{0, 0, 0, 0};
    for (int i = 0; i < n_free; ++i) c[i] = x[i];
    try {
      return objective(c);
    } catch (const Error&) {
      return penalty;
    }
  };

  const std::array<double, 4> start = opts.start.value_or(
      std::array<double, 4>{0, 0, 0, 0});
  if (n_free == 0) {
    res.objective = objective(start);
    res.coefficients = start;
    res.trace = {res.objective};
    res.converged = true;
    res.evals = 1;
    return res;
  }

  NelderMeadOptions nm;
  nm.initial_step = initial_step;
  nm.ftol_abs = ftol_abs;
  nm.max_iter = opts.max_iter;
  nm.max_evals = opts.max_evals;
  nm.restarts = opts.restarts;
  nm.seed = opts.seed;
  auto nm_res = nelder_mead(
      guarded, std::vector<double>(start.begin(), start.begin() + n_free), nm);

  for (int i = 0; i < n_free; ++i) res.coefficients[i] = nm_res.x[i];
  res.objective = nm_res.fval;
  res.trace = std::move(nm_res.best_trace);
  res.converged = nm_res.converged;
  res.evals = nm_res.evals;
  res.warning_not_converged = !nm_res.converged;
  if (res.objective >= penalty)
    throw Error("coefficient optimisation: no admissible evaluation");
  return res;
}

} // namespace

DesignResult design_equal_ions(const IonPair& ions, double omega0, double t_f,
                               double theta_f, int n_free,
                               const DesignOptions& opts) {
  if (ions.m1 != ions.m2)
    throw Error("design_equal_ions: masses must be equal");
  if (n_free < 0 || n_free > 4)
    throw Error("design_equal_ions: n_free must be in 0..4");

  const double hbar_w0 = internal::hbar * omega0;
  auto objective = [&](const std::array<double, 4>& c) {
    RotationAnsatz ansatz(theta_f, t_f, c, 4);
    return equal_ion_objective(ions, omega0, ansatz);
  };

  const double step = opts.initial_step > 0 ? opts.initial_step : 1e-3;
  DesignResult res = optimize_coefficients(objective, theta_f, t_f, n_free,
                                           step, 1e-12 * hbar_w0, opts,
                                           1e6 * hbar_w0);
  RotationAnsatz best(theta_f, t_f, res.coefficients, 4);
  std::array<double, 2> energies{};
  res.objective = equal_ion_objective(ions, omega0, best, &energies);
  res.mode_energies_final = energies;
  return res;
}

DesignResult design_direct(const IonPair& ions, const RigidHarmonicTrap& trap,
                           double t_f, double theta_f, int n_free,
                           const SimConfig& sim, const DesignOptions& opts) {
  if (n_free < 0 || n_free > 4)
    throw Error("design_direct: n_free must be in 0..4");

  // Grid and ground state are shared across objective evaluations: the t=0
  // potential does not depend on the coefficients.
  RotationAnsatz reference(theta_f, t_f, {0, 0, 0, 0}, 4);
  PotentialModel ref_model = PotentialModel::rigid(
      trap, ions, [reference](double t) { return reference.theta_dot(t); });
  const Grid2D grid = make_grid(ref_model, reference, sim);
  SimConfig cfg = sim;
  cfg.n1 = grid.n1;
  cfg.n2 = grid.n2;
  const GroundStateResult gs = ground_state(ref_model, grid, cfg);

  const double omega1 = std::sqrt(trap.k / ions.m1);
  const double hbar_w1 = internal::hbar * omega1;

  // Trial evaluations run with soft band checks: a leaking state returns
  // its (grid-truncated) excess plus a containment penalty, which steers
  // the simplex back toward resolvable protocols instead of crashing it.
  SimConfig trial_cfg = cfg;
  trial_cfg.soft_bands = true;
  auto trial_objective = [&](const std::array<double, 4>& c) {
    RotationAnsatz ansatz(theta_f, t_f, c, 4);
    PotentialModel model = PotentialModel::rigid(
        trap, ions, [ansatz](double t) { return ansatz.theta_dot(t); });
    auto run = propagate(model, gs.psi, ansatz, trial_cfg);
    double penalty = 0.0;
    if (run.edge_weight > cfg.edge_threshold ||
        run.clamp_weight > cfg.edge_threshold)
      penalty = 1e6 * hbar_w1 * (run.edge_weight + run.clamp_weight);
    return run.excess_energy + penalty;
  };

  const double step = opts.initial_step > 0 ? opts.initial_step : 1e-2;
  DesignResult res = optimize_coefficients(trial_objective, theta_f, t_f,
                                           n_free, step, 1e-12 * hbar_w1,
                                           opts, 1e6 * hbar_w1);

  // strict re-evaluation of the winner: band violations now fail hard
  RotationAnsatz best(theta_f, t_f, res.coefficients, 4);
  PotentialModel model = PotentialModel::rigid(
      trap, ions, [best](double t) { return best.theta_dot(t); });
  auto final_run = propagate(model, gs.psi, best, cfg);
  res.objective = final_run.excess_energy;
  return res;
}

} // namespace ionrot
