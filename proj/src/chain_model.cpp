#include "ionrot/chain_model.hpp"

#include <cmath>
#include <functional>

#include "ionrot/errors.hpp"

namespace ionrot {

EffectiveSprings effective_springs(const RigidHarmonicTrap& trap,
                                   const IonPair& ions, double theta_dot) {
  const double td2 = theta_dot * theta_dot;
  return {trap.k - ions.m1 * td2, trap.k - ions.m2 * td2};
}

ChainGeometry equilibrium_harmonic(const EffectiveSprings& springs,
                                   double cc) {
  const double u1 = springs.u1, u2 = springs.u2;
  if (!(u1 > 0.0) || !(u2 > 0.0))
    throw EquilibriumUndefined(
        "equilibrium_harmonic: non-confining effective springs");
  const double d = std::cbrt(cc * (u1 + u2) / (u1 * u2));
  // Force balance u_i s_i = -/+ Cc/d^2 reproduces the cube-root closed form.
  const double f = cc / (d * d);
  return {-f / u1, f / u2, d};
}

SymMat2 hessian_harmonic(const EffectiveSprings& springs, const IonPair& ions,
                         const ChainGeometry& geom, double cc) {
  if (!(geom.d > 0.0))
    throw DegenerateGeometry("hessian_harmonic: separation d <= 0");
  const double coul = 2.0 * cc / (geom.d * geom.d * geom.d);
  return {(coul + springs.u1) / ions.m1,
          -coul / std::sqrt(ions.m1 * ions.m2),
          (coul + springs.u2) / ions.m2};
}

ModeDecomposition mode_decomposition(const SymMat2& v, const IonPair& ions,
                                     double s1_eq_dot, double s2_eq_dot,
                                     std::optional<double> prev_mu) {
  const double diag = v.v11 - v.v22;
  const double scale = std::abs(v.v11) + std::abs(v.v22) + std::abs(v.v12);
  double two_mu;
  if (std::abs(diag) <= 1e-14 * scale) {
    two_mu = (v.v12 <= 0.0) ? -M_PI / 2.0 : M_PI / 2.0;
  } else {
    two_mu = std::atan(2.0 * v.v12 / diag);
  }
  double mu = 0.5 * two_mu;
  if (prev_mu) {
    // mu is defined modulo pi/2; pick the representative nearest the
    // previous sample.
    const double k = std::round((*prev_mu - mu) / (M_PI / 2.0));
    mu += k * (M_PI / 2.0);
  }
  const double c = std::cos(mu), s = std::sin(mu), s2m = std::sin(2.0 * mu);
  ModeDecomposition out;
  out.mu = mu;
  out.v = v;
  out.omega_plus_sq = v.v11 * c * c + v.v22 * s * s + v.v12 * s2m;
  out.omega_minus_sq = v.v11 * s * s + v.v22 * c * c - v.v12 * s2m;
  const double w1 = std::sqrt(ions.m1) * s1_eq_dot;
  const double w2 = std::sqrt(ions.m2) * s2_eq_dot;
  out.p0_plus = w1 * c + w2 * s;
  out.p0_minus = -w1 * s + w2 * c;
  return out;
}

std::vector<double> separability_drift(const RigidHarmonicTrap& trap,
                                       const IonPair& ions,
                                       const std::vector<double>& theta_dots,
                                       double cc) {
  std::vector<double> mus;
  mus.reserve(theta_dots.size());
  std::optional<double> prev;
  for (double td : theta_dots) {
    const auto u = effective_springs(trap, ions, td);
    const auto geom = equilibrium_harmonic(u, cc);
    const auto v = hessian_harmonic(u, ions, geom, cc);
    const auto modes = mode_decomposition(v, ions, 0.0, 0.0, prev);
    mus.push_back(modes.mu);
    prev = modes.mu;
  }
  return mus;
}

double magnetic_electric_ratio(double r, double theta_dot) {
  if (!(r > 0.0)) throw Error("magnetic_electric_ratio: r must be positive");
  const double c = internal::speed_of_light;
  return r * r * theta_dot * theta_dot / (4.0 * c * c);
}

std::pair<double, double> sym2_eigenvalues(const SymMat2& v) {
  const double mean = 0.5 * (v.v11 + v.v22);
  const double disc = std::hypot(0.5 * (v.v11 - v.v22), v.v12);
  return {mean + disc, mean - disc};
}

double deriv4(const std::function<double(double)>& f, double t, double h,
              double lo, double hi) {
  double tc = t;
  if (tc < lo + 2 * h) tc = lo + 2 * h;
  if (tc > hi - 2 * h) tc = hi - 2 * h;
  return (f(tc - 2 * h) - 8.0 * f(tc - h) + 8.0 * f(tc + h) - f(tc + 2 * h)) /
         (12.0 * h);
}

} // namespace ionrot
