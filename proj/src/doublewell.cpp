#include "ionrot/doublewell.hpp"

#include <algorithm>
#include <cmath>

#include "ionrot/errors.hpp"

namespace ionrot {

namespace {

// Midpoint consistent with both the equilibrium-difference and decoupling
// conditions, as a rational function of d (the s0^2 terms cancel in a
// linear combination of the two quadratics).
double s0_of_d(double d, double u1, double u2, double m1, double m2,
               double beta, double cc) {
  const double num = 8.0 * cc * (m2 - m1) + 4.0 * beta * std::pow(d, 5) * (m2 - m1) +
                     d * d * d * (m1 + m2) * (u1 - u2);
  const double den =
      2.0 * d * d * (12.0 * beta * d * d * (m1 + m2) + (m1 - m2) * (u1 - u2));
  return num / den;
}

// Equilibrium-difference residual with s0 eliminated; roots of this scalar
// function are the decoupled geometries.
double residual(double d, double u1, double u2, double m1, double m2,
                double beta, double cc) {
  const double s0 = s0_of_d(d, u1, u2, m1, m2, beta, cc);
  return 12.0 * beta * d * s0 * s0 - (u1 - u2) * s0 + beta * d * d * d +
         0.5 * d * (u1 + u2) - 2.0 * cc / (d * d);
}

double bisect_secant(const std::function<double(double)>& f, double lo,
                     double hi, double flo, double fhi) {
  // bisection with a secant polish once the bracket is tight
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((flo < 0) == (fm < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
      fhi = fm;
    }
    if (hi - lo < 1e-11 * hi) break;
  }
  double a = lo, b = hi, fa = flo, fb = fhi;
  for (int it = 0; it < 60; ++it) {
    if (fb == fa) break;
    const double c = b - fb * (b - a) / (fb - fa);
    if (!(c > lo && c < hi)) break;
    const double fc = f(c);
    a = b;
    fa = fb;
    b = c;
    fb = fc;
    if (std::abs(b - a) < 1e-15 * std::abs(b)) break;
  }
  return b;
}

struct RawGeometry {
  double d, s0, gamma, A;
};

RawGeometry finish(double d, double u1, double u2, double m1, double m2,
                   double beta, double cc) {
  const double s0 = s0_of_d(d, u1, u2, m1, m2, beta, cc);
  const double s1 = s0 - d / 2.0;
  const double gamma = -(u1 * s1 + 4.0 * beta * s1 * s1 * s1 + cc / (d * d));
  const double A = 12.0 * beta * d * d * d * s0 - d * d * (u1 - u2);
  return {d, s0, gamma, A};
}

// Solve in an order-normalised frame (lighter ion first); mirroring maps
// s -> -s, gamma -> -gamma, s0 -> -s0 and leaves d and the mode
// frequencies unchanged.
RawGeometry solve_canonical(double u1, double u2, double m1, double m2,
                            double beta, double cc, double d_warm) {
  auto f = [&](double d) { return residual(d, u1, u2, m1, m2, beta, cc); };

  if (d_warm > 0.0) {
    double lo = 0.97 * d_warm, hi = 1.03 * d_warm;
    double flo = f(lo), fhi = f(hi);
    for (int k = 0; k < 120 && (flo < 0) == (fhi < 0); ++k) {
      lo *= 0.985;
      hi *= 1.015;
      flo = f(lo);
      fhi = f(hi);
    }
    if ((flo < 0) != (fhi < 0)) {
      const double d = bisect_secant(f, lo, hi, flo, fhi);
      return finish(d, u1, u2, m1, m2, beta, cc);
    }
    throw InfeasibleConfiguration(
        "solve_separation: lost the warm-started root branch");
  }

  // cold start: scan a wide geometric bracket and keep the branch whose
  // ions straddle the centre with both modes confined
  const double umag1 = std::abs(u1), umag2 = std::abs(u2);
  const double d_guess = std::cbrt(cc * (umag1 + umag2) / (umag1 * umag2));
  const double lo_all = 0.05 * d_guess, hi_all = 60.0 * d_guess;
  const int n_scan = 3000;
  double best_d = -1.0;
  double prev_d = lo_all, prev_f = f(lo_all);
  for (int i = 1; i <= n_scan; ++i) {
    const double d =
        lo_all * std::pow(hi_all / lo_all, static_cast<double>(i) / n_scan);
    const double fd = f(d);
    if (std::isfinite(prev_f) && std::isfinite(fd) &&
        (prev_f < 0) != (fd < 0)) {
      const double root = bisect_secant(f, prev_d, d, prev_f, fd);
      const auto g = finish(root, u1, u2, m1, m2, beta, cc);
      const double s1 = g.s0 - g.d / 2.0, s2 = g.s0 + g.d / 2.0;
      const double cdd = 2.0 * cc / (g.d * g.d * g.d);
      const double v11 = (cdd + u1 + 12.0 * beta * s1 * s1) / m1;
      const double v12 = -cdd / std::sqrt(m1 * m2);
      const bool confined = (v11 - v12) > 0.0 && (v11 + v12) > 0.0;
      if (s1 < 0.0 && s2 > 0.0 && confined && root > best_d) best_d = root;
    }
    prev_d = d;
    prev_f = fd;
  }
  if (best_d < 0.0)
    throw InfeasibleConfiguration(
        "solve_separation: no confined straddling geometry in bracket");
  return finish(best_d, u1, u2, m1, m2, beta, cc);
}

void validate_geometry(const RawGeometry& g, double u1, double u2, double m1,
                       double m2, double beta, double cc) {
  const double s1 = g.s0 - g.d / 2.0, s2 = g.s0 + g.d / 2.0;
  const double d = g.d;
  const double gr1 = g.gamma + u1 * s1 + 4 * beta * s1 * s1 * s1 + cc / (d * d);
  const double gr2 = g.gamma + u2 * s2 + 4 * beta * s2 * s2 * s2 - cc / (d * d);
  const double force_scale = std::abs(cc / (d * d)) + std::abs(g.gamma);
  const double cdd = 2.0 * cc / (d * d * d);
  const double v11 = (cdd + u1 + 12 * beta * s1 * s1) / m1;
  const double v22 = (cdd + u2 + 12 * beta * s2 * s2) / m2;
  const double v12 = -cdd / std::sqrt(m1 * m2);
  if (std::abs(gr1) + std::abs(gr2) > 1e-9 * force_scale ||
      std::abs(v11 - v22) > 1e-6 * std::abs(v12))
    throw InconsistentGeometry(
        "solve_separation: geometry failed the equilibrium/decoupling check");
}

} // namespace

SeparableGeometry solve_separation(double u1, double u2, double beta,
                                   const IonPair& ions, double d_warm,
                                   double cc) {
  if (ions.m1 == ions.m2)
    throw InfeasibleConfiguration(
        "solve_separation: equal masses collapse the decoupling constraint");
  if (!(beta > 0.0))
    throw InfeasibleConfiguration("solve_separation: beta must be positive");

  RawGeometry g;
  if (ions.m1 < ions.m2) {
    g = solve_canonical(u1, u2, ions.m1, ions.m2, beta, cc, d_warm);
    validate_geometry(g, u1, u2, ions.m1, ions.m2, beta, cc);
  } else {
    g = solve_canonical(u2, u1, ions.m2, ions.m1, beta, cc, d_warm);
    validate_geometry(g, u2, u1, ions.m2, ions.m1, beta, cc);
    g.s0 = -g.s0;
    g.gamma = -g.gamma;
  }
  return {g.d, g.s0, g.A, g.gamma};
}

DoubleWellTrack::DoubleWellTrack(const DoubleWellConfig& config,
                                 const IonPair& ions,
                                 const RotationAnsatz& ansatz)
    : config_(config), ions_(ions), ansatz_(ansatz) {
  const auto g0 = solve_separation(config.mw2, config.mw2, config.beta, ions_);
  warm_d_ = g0.d;
}

EffectiveSprings DoubleWellTrack::springs(double t) const {
  const double td = ansatz_.theta_dot(t);
  return {config_.mw2 - ions_.m1 * td * td, config_.mw2 - ions_.m2 * td * td};
}

SeparableGeometry DoubleWellTrack::at(double t) const {
  const auto u = springs(t);
  const auto g =
      solve_separation(u.u1, u.u2, config_.beta, ions_, warm_d_);
  warm_d_ = g.d;
  return g;
}

SymMat2 DoubleWellTrack::hessian(double t) const {
  const auto u = springs(t);
  const auto g = at(t);
  const double s1 = g.s0 - g.d / 2.0, s2 = g.s0 + g.d / 2.0;
  const double cdd = 2.0 * internal::coulomb_coupling / (g.d * g.d * g.d);
  return {(cdd + u.u1 + 12.0 * config_.beta * s1 * s1) / ions_.m1,
          -cdd / std::sqrt(ions_.m1 * ions_.m2),
          (cdd + u.u2 + 12.0 * config_.beta * s2 * s2) / ions_.m2};
}

ModeDecomposition DoubleWellTrack::modes(double t) const {
  return mode_decomposition(hessian(t), ions_);
}

std::pair<ModeDrive, ModeDrive>
mode_drives_doublewell(const DoubleWellTrack& track) {
  const double tf = track.ansatz().t_f();
  const double h = tf / 2000.0;
  const double m1 = track.ions().m1, m2 = track.ions().m2;
  const double rm1 = std::sqrt(m1), rm2 = std::sqrt(m2);

  auto d_of = [&track](double t) { return track.at(t).d; };
  auto s0_of = [&track](double t) { return track.at(t).s0; };

  auto p0 = [=, &track](double t, bool plus) {
    const double dd = deriv4(d_of, t, h, 0.0, tf);
    const double sd0 = deriv4(s0_of, t, h, 0.0, tf);
    const double sd1 = sd0 - dd / 2.0, sd2 = sd0 + dd / 2.0;
    // tilt frame at mu = -pi/4
    return plus ? (rm1 * sd1 - rm2 * sd2) / std::sqrt(2.0)
                : (rm1 * sd1 + rm2 * sd2) / std::sqrt(2.0);
  };

  ModeDrive plus, minus;
  const auto m0 = track.modes(0.0);
  plus.omega0_sq = m0.omega_plus_sq;
  minus.omega0_sq = m0.omega_minus_sq;
  plus.omega_sq = [&track](double t) { return track.modes(t).omega_plus_sq; };
  minus.omega_sq = [&track](double t) { return track.modes(t).omega_minus_sq; };
  plus.p0_dot = [=](double t) {
    return deriv4([&](double tt) { return p0(tt, true); }, t, h, 0.0, tf);
  };
  minus.p0_dot = [=](double t) {
    return deriv4([&](double tt) { return p0(tt, false); }, t, h, 0.0, tf);
  };
  return {plus, minus};
}

DoubleWellSeries sample_doublewell_series(const DoubleWellTrack& track,
                                          int n_samples) {
  DoubleWellSeries s;
  const double tf = track.ansatz().t_f();
  for (int i = 0; i <= n_samples; ++i) {
    const double t = tf * i / n_samples;
    const auto g = track.at(t);
    const auto m = track.modes(t);
    s.t.push_back(t);
    s.d.push_back(g.d);
    s.s0.push_back(g.s0);
    s.gamma.push_back(g.gamma);
    s.omega_plus.push_back(std::sqrt(std::max(0.0, m.omega_plus_sq)));
    s.omega_minus.push_back(std::sqrt(std::max(0.0, m.omega_minus_sq)));
  }
  return s;
}

double doublewell_excitation(const DoubleWellTrack& track) {
  const double tf = track.ansatz().t_f();
  auto [plus, minus] = mode_drives_doublewell(track);
  const auto trj_p = solve_auxiliary(plus, tf);
  const auto trj_m = solve_auxiliary(minus, tf);
  const double ep = mode_energy(0, trj_p.final_state(), plus.omega_sq(tf),
                                plus.p0_dot(tf), plus.omega0_sq);
  const double em = mode_energy(0, trj_m.final_state(), minus.omega_sq(tf),
                                minus.p0_dot(tf), minus.omega0_sq);
  const double e0 = internal::hbar *
                    (std::sqrt(plus.omega0_sq) + std::sqrt(minus.omega0_sq)) /
                    2.0;
  return (ep + em - e0) / e0;
}

DesignResult design_doublewell(const IonPair& ions,
                               const DoubleWellConfig& config, double t_f,
                               double theta_f, int n_free,
                               const DesignOptions& opts) {
  if (n_free < 0 || n_free > 2)
    throw Error("design_doublewell: n_free must be in 0..2");

  auto objective = [&](const std::array<double, 4>& c) {
    RotationAnsatz ansatz(theta_f, t_f, c, 4);
    DoubleWellTrack track(config, ions, ansatz);
    return doublewell_excitation(track);
  };

  DesignResult res;
  auto guarded = [&](std::span<const double> x) {
    std::array<double, 4> c{0, 0, 0, 0};
    for (int i = 0; i < n_free; ++i) c[i] = x[i];
    try {
      return objective(c);
    } catch (const Error&) {
      return 1e12;
    }
  };

  if (n_free == 0) {
    res.objective = objective({0, 0, 0, 0});
    res.trace = {res.objective};
    res.converged = true;
    res.evals = 1;
  } else {
    NelderMeadOptions nm;
    nm.initial_step = opts.initial_step > 0 ? opts.initial_step : 1e-2;
    nm.ftol_abs = 1e-12;
    nm.max_iter = opts.max_iter;
    nm.max_evals = opts.max_evals;
    nm.restarts = opts.restarts;
    nm.seed = opts.seed;
    auto nm_res = nelder_mead(guarded, std::vector<double>(n_free, 0.0), nm);
    for (int i = 0; i < n_free; ++i) res.coefficients[i] = nm_res.x[i];
    res.objective = nm_res.fval;
    res.trace = std::move(nm_res.best_trace);
    res.converged = nm_res.converged;
    res.evals = nm_res.evals;
    res.warning_not_converged = !nm_res.converged;
    if (res.objective >= 1e12)
      throw InfeasibleConfiguration(
          "design_doublewell: no admissible evaluation");
  }

  RotationAnsatz best(theta_f, t_f, res.coefficients, 4);
  DoubleWellTrack track(config, ions, best);
  auto [plus, minus] = mode_drives_doublewell(track);
  const auto trj_p = solve_auxiliary(plus, t_f);
  const auto trj_m = solve_auxiliary(minus, t_f);
  res.mode_energies_final = {
      mode_energy(0, trj_p.final_state(), plus.omega_sq(t_f),
                  plus.p0_dot(t_f), plus.omega0_sq),
      mode_energy(0, trj_m.final_state(), minus.omega_sq(t_f),
                  minus.p0_dot(t_f), minus.omega0_sq)};
  res.objective = doublewell_excitation(track);
  return res;
}

} // namespace ionrot
