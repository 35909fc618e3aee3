#include <doctest.h>

#include <cmath>
#include <random>

#include "ionrot/chain_model.hpp"
#include "ionrot/errors.hpp"
#include "ionrot/nelder_mead.hpp"

using namespace ionrot;

namespace {

const double w0 = 8.859291427616929; // 2 pi 1.41 MHz in rad/us
const IonPair ca_ca{40.0, 40.0};
const IonPair ca_be{40.0, 9.0};

double potential(const EffectiveSprings& u, double s1, double s2) {
  return 0.5 * u.u1 * s1 * s1 + 0.5 * u.u2 * s2 * s2 +
         internal::coulomb_coupling / (s2 - s1);
}

// independent equilibrium oracle: minimize V directly
ChainGeometry minimize_potential(const EffectiveSprings& u) {
  auto f = [&](std::span<const double> x) {
    if (x[1] - x[0] < 1e-6) return 1e30;
    return potential(u, x[0], x[1]);
  };
  NelderMeadOptions opts;
  opts.initial_step = 0.5;
  opts.ftol_abs = 1e-14;
  opts.max_iter = 4000;
  auto res = nelder_mead(f, {-1.0, 1.0}, opts);
  return {res.x[0], res.x[1], res.x[1] - res.x[0]};
}

} // namespace

TEST_CASE("effective springs") {
  const RigidHarmonicTrap trap{ca_ca.m1 * w0 * w0};

  SUBCASE("zero rotation keeps u = k for any species") {
    auto u = effective_springs(trap, ca_be, 0.0);
    CHECK(u.u1 == doctest::Approx(trap.k).epsilon(1e-15));
    CHECK(u.u2 == doctest::Approx(trap.k).epsilon(1e-15));
  }
  SUBCASE("Ca+Be at theta_dot = w1/2") {
    auto u = effective_springs(trap, ca_be, 0.5 * w0);
    CHECK(u.u1 == doctest::Approx(0.75 * trap.k).epsilon(1e-12));
    CHECK(u.u2 ==
          doctest::Approx(trap.k * (1.0 - (9.0 / 40.0) * 0.25)).epsilon(1e-12));
  }
  SUBCASE("equal masses at theta_dot = w0 cancel the confinement") {
    auto u = effective_springs(trap, ca_ca, w0);
    CHECK(std::abs(u.u1) < 1e-9 * trap.k);
    CHECK(std::abs(u.u2) < 1e-9 * trap.k);
  }
}

TEST_CASE("harmonic equilibrium") {
  const double k = ca_ca.m1 * w0 * w0;

  SUBCASE("symmetric for equal springs") {
    const EffectiveSprings u{k, k};
    auto g = equilibrium_harmonic(u);
    CHECK(g.d ==
          doctest::Approx(std::cbrt(2 * internal::coulomb_coupling / k))
              .epsilon(1e-14));
    CHECK(g.s1 == doctest::Approx(-g.d / 2).epsilon(1e-14));
    CHECK(g.s2 == doctest::Approx(g.d / 2).epsilon(1e-14));
  }
  SUBCASE("two Ca-40 at 1.41 MHz sit 4.46 um apart; matches minimization") {
    const EffectiveSprings u{k, k};
    auto g = equilibrium_harmonic(u);
    CHECK(g.d == doctest::Approx(4.46).epsilon(2e-3));
    auto oracle = minimize_potential(u);
    CHECK(g.d == doctest::Approx(oracle.d).epsilon(1e-5));
    CHECK(g.s1 == doctest::Approx(oracle.s1).epsilon(1e-4));
  }
  SUBCASE("separation is mass-independent at theta_dot = 0") {
    const EffectiveSprings u{k, k}; // Ca+Be share u_i = k when static
    auto g_mixed = equilibrium_harmonic(u);
    auto g_equal = equilibrium_harmonic(EffectiveSprings{k, k});
    CHECK(g_mixed.d == doctest::Approx(g_equal.d).epsilon(1e-15));
  }
  SUBCASE("asymmetric springs keep zero gradient") {
    const EffectiveSprings u{k, 0.4 * k};
    auto g = equilibrium_harmonic(u);
    const double force_scale =
        internal::coulomb_coupling / (g.d * g.d);
    const double g1 = u.u1 * g.s1 + internal::coulomb_coupling / (g.d * g.d);
    const double g2 = u.u2 * g.s2 - internal::coulomb_coupling / (g.d * g.d);
    CHECK(std::abs(g1) < 1e-10 * force_scale);
    CHECK(std::abs(g2) < 1e-10 * force_scale);
  }
  SUBCASE("non-confining springs are rejected") {
    CHECK_THROWS_AS(equilibrium_harmonic(EffectiveSprings{-1.0, k}),
                    EquilibriumUndefined);
    CHECK_THROWS_AS(equilibrium_harmonic(EffectiveSprings{k, 0.0}),
                    EquilibriumUndefined);
  }
}

TEST_CASE("hessian") {
  const double k = ca_ca.m1 * w0 * w0;

  SUBCASE("equal ions: symmetric, eigenvalues w0^2 and 3 w0^2") {
    const EffectiveSprings u{k, k};
    auto g = equilibrium_harmonic(u);
    auto v = hessian_harmonic(u, ca_ca, g);
    CHECK(v.v11 == doctest::Approx(v.v22).epsilon(1e-14));
    auto [hi, lo] = sym2_eigenvalues(v);
    CHECK(hi == doctest::Approx(3 * w0 * w0).epsilon(1e-12));
    CHECK(lo == doctest::Approx(w0 * w0).epsilon(1e-12));
  }
  SUBCASE("Ca+Be: matches central finite differences of V") {
    const EffectiveSprings u{k, k};
    auto g = equilibrium_harmonic(u);
    auto v = hessian_harmonic(u, ca_be, g);
    const double h = 1e-4;
    auto V = [&](double s1, double s2) { return potential(u, s1, s2); };
    const double d11 = (V(g.s1 + h, g.s2) - 2 * V(g.s1, g.s2) +
                        V(g.s1 - h, g.s2)) /
                       (h * h) / ca_be.m1;
    const double d22 = (V(g.s1, g.s2 + h) - 2 * V(g.s1, g.s2) +
                        V(g.s1, g.s2 - h)) /
                       (h * h) / ca_be.m2;
    const double d12 = (V(g.s1 + h, g.s2 + h) - V(g.s1 + h, g.s2 - h) -
                        V(g.s1 - h, g.s2 + h) + V(g.s1 - h, g.s2 - h)) /
                       (4 * h * h) / std::sqrt(ca_be.m1 * ca_be.m2);
    CHECK(v.v11 == doctest::Approx(d11).epsilon(1e-6));
    CHECK(v.v22 == doctest::Approx(d22).epsilon(1e-6));
    CHECK(v.v12 == doctest::Approx(d12).epsilon(1e-6));
  }
  SUBCASE("degenerate separation is rejected") {
    CHECK_THROWS_AS(
        hessian_harmonic(EffectiveSprings{k, k}, ca_ca, ChainGeometry{0, 0, 0}),
        DegenerateGeometry);
  }
}

TEST_CASE("mode decomposition") {
  const double k = ca_ca.m1 * w0 * w0;

  SUBCASE("equal masses give mu = -pi/4") {
    const EffectiveSprings u{k, k};
    auto g = equilibrium_harmonic(u);
    auto modes = mode_decomposition(hessian_harmonic(u, ca_ca, g), ca_ca);
    CHECK(modes.mu == doctest::Approx(-M_PI / 4).epsilon(1e-14));
    CHECK(modes.omega_plus_sq == doctest::Approx(3 * w0 * w0).epsilon(1e-12));
    CHECK(modes.omega_minus_sq == doctest::Approx(w0 * w0).epsilon(1e-12));
  }
  SUBCASE("static Ca+Be: tan 2mu = sqrt(m1 m2)/(m1 - m2)") {
    const EffectiveSprings u{k, k};
    auto g = equilibrium_harmonic(u);
    auto modes = mode_decomposition(hessian_harmonic(u, ca_be, g), ca_be);
    const double expected = std::sqrt(360.0) / 31.0; // ~0.6120
    CHECK(std::tan(2 * modes.mu) == doctest::Approx(expected).epsilon(1e-10));
    CHECK(modes.mu == doctest::Approx(0.2746).epsilon(2e-3));
  }
  SUBCASE("equal-ion momentum shifts") {
    const EffectiveSprings u{k, k};
    auto g = equilibrium_harmonic(u);
    const double x0dot = 0.37;
    auto modes = mode_decomposition(hessian_harmonic(u, ca_ca, g), ca_ca,
                                    -x0dot / 2, x0dot / 2);
    CHECK(modes.p0_plus ==
          doctest::Approx(-std::sqrt(ca_ca.m1 / 2) * x0dot).epsilon(1e-12));
    CHECK(std::abs(modes.p0_minus) < 1e-14);
  }
  SUBCASE("trace and determinant preserved for random Hessians") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uni(-5.0, 5.0);
    for (int i = 0; i < 200; ++i) {
      SymMat2 v{uni(rng), uni(rng), uni(rng)};
      auto modes = mode_decomposition(v, ca_be);
      const double tr = v.v11 + v.v22;
      const double det = v.v11 * v.v22 - v.v12 * v.v12;
      CHECK(modes.omega_plus_sq + modes.omega_minus_sq ==
            doctest::Approx(tr).epsilon(1e-12));
      CHECK(modes.omega_plus_sq * modes.omega_minus_sq ==
            doctest::Approx(det).epsilon(1e-10));
      auto eig = sym2_eigenvalues(v);
      const double hi = std::max(modes.omega_plus_sq, modes.omega_minus_sq);
      CHECK(hi == doctest::Approx(eig.first).epsilon(1e-12));
    }
  }
}

TEST_CASE("separability drift") {
  const double k = ca_ca.m1 * w0 * w0;
  const RigidHarmonicTrap trap{k};

  SUBCASE("equal masses: constant mu for any speeds") {
    auto mus = separability_drift(trap, ca_ca, {0.0, 0.2 * w0, 0.5 * w0});
    for (double mu : mus) CHECK(mu == doctest::Approx(-M_PI / 4).epsilon(1e-12));
  }
  SUBCASE("Ca+Be: mu moves with rotation speed") {
    auto mus = separability_drift(trap, ca_be, {0.0, 0.3 * w0});
    CHECK(std::abs(mus[0] - mus[1]) > 1e-4);
  }
  SUBCASE("theta_dot^2 proportional to k keeps mu fixed") {
    // with theta_dot^2 = a k the product d^3 k is k-independent
    const double a = 1.0 / 200.0; // < 1/m_i, confining for both ions
    std::optional<double> first;
    for (double scale : {0.5, 1.0, 2.0, 5.0}) {
      const RigidHarmonicTrap tk{scale * k};
      auto mus =
          separability_drift(tk, ca_be, {std::sqrt(a * tk.k)});
      if (!first)
        first = mus[0];
      else
        CHECK(mus[0] == doctest::Approx(*first).epsilon(1e-10));
    }
  }
}

TEST_CASE("magnetic to electric force ratio") {
  // r = 5.5 um, theta_dot = 5e6 rad/s = 5 rad/us
  const double r = magnetic_electric_ratio(5.5, 5.0);
  const double c = internal::speed_of_light;
  CHECK(r == doctest::Approx(5.5 * 5.5 * 25.0 / (4 * c * c)).epsilon(1e-14));
  CHECK(r == doctest::Approx(2.1e-15).epsilon(2e-2));
  CHECK(r < 1e-10);
  CHECK(magnetic_electric_ratio(3.3, 0.0) == 0.0);
  CHECK(magnetic_electric_ratio(2 * 5.5, 5.0 / 2) ==
        doctest::Approx(r).epsilon(1e-14));
}
