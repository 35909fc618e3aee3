// Rotation-angle trajectory theta(t): a six-cosine ansatz over odd harmonics
// of pi/t_f that satisfies theta(0)=0, theta(t_f)=theta_f and vanishing first
// and second derivatives at both ends for any choice of the free coefficients
// c3..c6.  Derivatives are evaluated term by term, never numerically.
#pragma once

#include <array>
#include <cstddef>

namespace ionrot {

class RotationAnsatz {
public:
  // Trailing coefficients beyond n_free are pinned to exactly zero.
  RotationAnsatz(double theta_f, double t_f,
                 std::array<double, 4> c = {0, 0, 0, 0}, int n_free = 4);

  double theta(double t) const;
  double theta_dot(double t) const;
  double theta_ddot(double t) const;
  double theta_dddot(double t) const;

  // omega0^2 - theta_dot(t)^2; may be negative.
  double effective_frequency_sq(double omega0, double t) const;

  double theta_f() const { return theta_f_; }
  double t_f() const { return t_f_; }
  const std::array<double, 4>& coefficients() const { return c_; }
  int n_free() const { return n_free_; }

  // Largest |theta_dot| over the protocol (dense scan; used for regime
  // warnings and grid sizing).
  double max_theta_dot_abs(int samples = 4001) const;

private:
  void check_domain(double t) const;

  double theta_f_;
  double t_f_;
  std::array<double, 4> c_;
  int n_free_;
  // amplitudes of cos(n pi t / t_f) for n = 1,3,5,7,9,11
  std::array<double, 6> amp_;
  static constexpr std::array<int, 6> harmonics_ = {1, 3, 5, 7, 9, 11};
};

} // namespace ionrot
