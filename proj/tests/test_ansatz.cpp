#include <doctest.h>

#include <cmath>
#include <random>

#include "ionrot/errors.hpp"
#include "ionrot/rotation_ansatz.hpp"

using namespace ionrot;

namespace {

// 4th-order central difference, for checking the analytic derivatives
double fd1(const RotationAnsatz& a, double t, double h) {
  return (a.theta(t - 2 * h) - 8 * a.theta(t - h) + 8 * a.theta(t + h) -
          a.theta(t + 2 * h)) /
         (12 * h);
}
double fd2(const RotationAnsatz& a, double t, double h) {
  return (-a.theta(t - 2 * h) + 16 * a.theta(t - h) - 30 * a.theta(t) +
          16 * a.theta(t + h) - a.theta(t + 2 * h)) /
         (12 * h * h);
}

} // namespace

TEST_CASE("boundary identities hold for random coefficients") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  const double tf = 2.0, thf = M_PI;
  for (int k = 0; k < 1000; ++k) {
    RotationAnsatz a(thf, tf, {uni(rng), uni(rng), uni(rng), uni(rng)}, 4);
    CHECK(std::abs(a.theta(0.0)) < 1e-12);
    CHECK(std::abs(a.theta(tf) - thf) < 1e-12);
    CHECK(std::abs(a.theta_dot(0.0)) < 1e-12);
    CHECK(std::abs(a.theta_dot(tf)) < 1e-12);
    CHECK(std::abs(a.theta_ddot(0.0)) < 1e-10);
    CHECK(std::abs(a.theta_ddot(tf)) < 1e-10);
  }
}

TEST_CASE("mid-protocol angle is theta_f/2") {
  RotationAnsatz a(M_PI, 3.0, {0.3, -0.2, 0.05, 0.7}, 4);
  CHECK(a.theta(1.5) == doctest::Approx(M_PI / 2).epsilon(1e-14));
}

TEST_CASE("theta_f symmetry: theta(t) + theta(t_f - t) = theta_f") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  RotationAnsatz a(M_PI, 1.7, {uni(rng), uni(rng), uni(rng), uni(rng)}, 4);
  for (int i = 0; i <= 50; ++i) {
    const double t = 1.7 * i / 50;
    CHECK(std::abs(a.theta(t) + a.theta(1.7 - t) - M_PI) < 1e-12);
  }
}

TEST_CASE("analytic derivatives match finite differences") {
  RotationAnsatz a(M_PI, 2.0, {0.01, -0.02, 0.005, 0.003}, 4);
  const double h = 1e-4;
  for (double t : {0.31, 0.77, 1.0, 1.43, 1.88}) {
    CHECK(a.theta_dot(t) == doctest::Approx(fd1(a, t, h)).epsilon(1e-8));
    CHECK(a.theta_ddot(t) == doctest::Approx(fd2(a, t, h)).epsilon(1e-7));
    // third derivative via finite difference of theta_ddot
    const double d3 = (a.theta_ddot(t - 2 * h) - 8 * a.theta_ddot(t - h) +
                       8 * a.theta_ddot(t + h) - a.theta_ddot(t + 2 * h)) /
                      (12 * h);
    CHECK(a.theta_dddot(t) == doctest::Approx(d3).epsilon(1e-8));
  }
}

TEST_CASE("c=0 midpoint rate and time scaling") {
  const double thf = M_PI;
  RotationAnsatz a1(thf, 1.0);
  // at t_f/2 the two surviving harmonics add to (3/4) theta_f pi / t_f
  CHECK(a1.theta_dot(0.5) ==
        doctest::Approx(0.75 * thf * M_PI).epsilon(1e-12));
  RotationAnsatz a2(thf, 2.0);
  for (double frac : {0.1, 0.25, 0.4, 0.5, 0.8}) {
    CHECK(a2.theta_dot(2.0 * frac) ==
          doctest::Approx(0.5 * a1.theta_dot(frac)).epsilon(1e-12));
  }
}

TEST_CASE("effective frequency squared") {
  const double w0 = 8.8593;
  RotationAnsatz a(M_PI, 2.0);
  CHECK(a.effective_frequency_sq(w0, 0.0) ==
        doctest::Approx(w0 * w0).epsilon(1e-14));
  CHECK(a.effective_frequency_sq(w0, 2.0) ==
        doctest::Approx(w0 * w0).epsilon(1e-14));

  // null rotation keeps omega^2 = omega0^2 everywhere
  RotationAnsatz null(0.0, 2.0);
  for (double t : {0.0, 0.4, 1.0, 1.7})
    CHECK(null.effective_frequency_sq(w0, t) ==
          doctest::Approx(w0 * w0).epsilon(1e-14));

  // fast protocols invert the effective potential mid-protocol:
  // max|theta_dot| = 3 pi^2/(4 t_f) exceeds w0 once t_f < 3 pi^2/(4 w0)
  const double tf_crit = 3 * M_PI * M_PI / (4 * w0);
  RotationAnsatz fast(M_PI, 0.9 * tf_crit);
  CHECK(fast.effective_frequency_sq(w0, 0.45 * tf_crit) < 0.0);
  RotationAnsatz slow(M_PI, 1.1 * tf_crit);
  CHECK(slow.effective_frequency_sq(w0, 0.55 * tf_crit) > 0.0);
}

TEST_CASE("domain errors outside [0, t_f]") {
  RotationAnsatz a(M_PI, 1.0);
  CHECK_THROWS_AS(a.theta(-0.1), Error);
  CHECK_THROWS_AS(a.theta(1.1), Error);
  CHECK_THROWS_AS(a.theta_dot(2.0), Error);
}

TEST_CASE("trailing coefficients pinned by n_free") {
  RotationAnsatz a(M_PI, 1.0, {0.1, 0.2, 0.3, 0.4}, 2);
  CHECK(a.coefficients()[0] == 0.1);
  CHECK(a.coefficients()[1] == 0.2);
  CHECK(a.coefficients()[2] == 0.0);
  CHECK(a.coefficients()[3] == 0.0);
  RotationAnsatz b(M_PI, 1.0, {0.1, 0.2, 0.0, 0.0}, 4);
  for (double t : {0.2, 0.5, 0.9})
    CHECK(a.theta(t) == doctest::Approx(b.theta(t)).epsilon(1e-15));
}
