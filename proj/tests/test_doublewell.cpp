#include <doctest.h>

#include <cmath>

#include "ionrot/doublewell.hpp"
#include "ionrot/errors.hpp"

using namespace ionrot;

namespace {

// Fig-B1-style configuration: shared repulsive curvature, quartic confinement
const double mw2 = -4.7e-12 / (codata::atomic_mass_unit * 1e12); // -4.7 pN/m
const double beta_q = 0.52e-3 / (codata::atomic_mass_unit * 1e24); // 0.52 mN/m^3
const IonPair be_ca{9.0, 40.0};
const IonPair ca_be{40.0, 9.0};
const DoubleWellConfig dw{mw2, beta_q};

double grad1(const SeparableGeometry& g, double u1) {
  const double s1 = g.s0 - g.d / 2;
  return g.gamma + u1 * s1 + 4 * beta_q * s1 * s1 * s1 +
         internal::coulomb_coupling / (g.d * g.d);
}
double grad2(const SeparableGeometry& g, double u2) {
  const double s2 = g.s0 + g.d / 2;
  return g.gamma + u2 * s2 + 4 * beta_q * s2 * s2 * s2 -
         internal::coulomb_coupling / (g.d * g.d);
}

SymMat2 hessian_of(const SeparableGeometry& g, double u1, double u2,
                   const IonPair& ions) {
  const double s1 = g.s0 - g.d / 2, s2 = g.s0 + g.d / 2;
  const double cdd = 2 * internal::coulomb_coupling / (g.d * g.d * g.d);
  return {(cdd + u1 + 12 * beta_q * s1 * s1) / ions.m1,
          -cdd / std::sqrt(ions.m1 * ions.m2),
          (cdd + u2 + 12 * beta_q * s2 * s2) / ions.m2};
}

} // namespace

TEST_CASE("static separable geometry satisfies the defining constraints") {
  const auto g = solve_separation(mw2, mw2, beta_q, be_ca);
  const double force_scale =
      internal::coulomb_coupling / (g.d * g.d) + std::abs(g.gamma);
  CHECK(std::abs(grad1(g, mw2)) < 1e-10 * force_scale);
  CHECK(std::abs(grad2(g, mw2)) < 1e-10 * force_scale);
  const auto v = hessian_of(g, mw2, mw2, be_ca);
  CHECK(std::abs(v.v11 - v.v22) < 1e-8 * std::abs(v.v12));
  // ions straddle the centre, one per well
  CHECK(g.s0 - g.d / 2 < 0.0);
  CHECK(g.s0 + g.d / 2 > 0.0);
  CHECK(g.d == doctest::Approx(89.3047).epsilon(1e-4));
}

TEST_CASE("perturbing gamma destroys the force balance") {
  auto g = solve_separation(mw2, mw2, beta_q, be_ca);
  const double force_scale = internal::coulomb_coupling / (g.d * g.d);
  g.gamma *= 1.01;
  CHECK(std::abs(grad1(g, mw2)) > 1e-4 * force_scale);
}

TEST_CASE("equal masses are rejected") {
  CHECK_THROWS_AS(solve_separation(mw2, mw2, beta_q, IonPair{40.0, 40.0}),
                  InfeasibleConfiguration);
}

TEST_CASE("mass exchange mirrors the geometry and keeps the frequencies") {
  const auto ga = solve_separation(mw2, mw2, beta_q, be_ca);
  const auto gb = solve_separation(mw2, mw2, beta_q, ca_be);
  CHECK(ga.d == doctest::Approx(gb.d).epsilon(1e-12));
  CHECK(ga.s0 == doctest::Approx(-gb.s0).epsilon(1e-12));
  CHECK(ga.gamma == doctest::Approx(-gb.gamma).epsilon(1e-12));
  const auto va = hessian_of(ga, mw2, mw2, be_ca);
  const auto vb = hessian_of(gb, mw2, mw2, ca_be);
  auto ea = sym2_eigenvalues(va), eb = sym2_eigenvalues(vb);
  CHECK(ea.first == doctest::Approx(eb.first).epsilon(1e-10));
  CHECK(ea.second == doctest::Approx(eb.second).epsilon(1e-10));
}

TEST_CASE("rotating geometry keeps the joint oracle along the protocol") {
  RotationAnsatz ansatz(M_PI, 1.0);
  DoubleWellTrack track(dw, be_ca, ansatz);
  for (int i = 0; i <= 40; ++i) {
    const double t = i / 40.0;
    const auto u = track.springs(t);
    const auto g = track.at(t);
    const double force_scale =
        internal::coulomb_coupling / (g.d * g.d) + std::abs(g.gamma);
    CHECK(std::abs(grad1(g, u.u1)) < 1e-10 * force_scale);
    CHECK(std::abs(grad2(g, u.u2)) < 1e-10 * force_scale);
    const auto v = hessian_of(g, u.u1, u.u2, be_ca);
    CHECK(std::abs(v.v11 - v.v22) < 1e-8 * std::abs(v.v12));
  }
}

TEST_CASE("confined modes and continuous series through the rotation") {
  RotationAnsatz ansatz(M_PI, 1.0);
  DoubleWellTrack track(dw, be_ca, ansatz);
  const auto series = sample_doublewell_series(track, 2000);
  for (std::size_t i = 0; i < series.t.size(); ++i) {
    CHECK(series.omega_plus[i] > 0.0);
    CHECK(series.omega_minus[i] > 0.0);
    if (i > 0) {
      CHECK(std::abs(series.d[i] - series.d[i - 1]) < 0.05 * series.d[i - 1]);
      CHECK(std::abs(series.gamma[i] - series.gamma[i - 1]) <
            0.05 * std::abs(series.gamma[i - 1]));
    }
  }
}

TEST_CASE("static protocol has vanishing momentum-shift rates") {
  RotationAnsatz null(0.0, 1.0);
  DoubleWellTrack track(dw, be_ca, null);
  auto [plus, minus] = mode_drives_doublewell(track);
  for (double t : {0.0, 0.3, 0.5, 0.9}) {
    CHECK(std::abs(plus.p0_dot(t)) < 1e-9);
    CHECK(std::abs(minus.p0_dot(t)) < 1e-9);
  }
  // degenerate-diagonal decomposition labels: + mode above - mode
  CHECK(plus.omega0_sq > minus.omega0_sq);
}

TEST_CASE("two-parameter design reaches deep decoupled minima") {
  DesignOptions opts;
  opts.max_iter = 400;
  auto res = design_doublewell(be_ca, dw, 2.0, M_PI, 2, opts);
  CHECK(res.objective < 1e-3);
  CHECK(res.objective >= -1e-12);
  // coefficient scale comparable to 1e-2
  CHECK(std::abs(res.coefficients[0]) < 0.2);
  CHECK(std::abs(res.coefficients[1]) < 0.2);
}

TEST_CASE("adiabatic limit without optimisation") {
  auto res = design_doublewell(be_ca, dw, 30.0, M_PI, 0, {});
  CHECK(res.objective < 1e-3);
}
