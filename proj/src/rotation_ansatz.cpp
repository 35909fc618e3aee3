#include "ionrot/rotation_ansatz.hpp"

#include <cmath>
#include <stdexcept>

#include "ionrot/errors.hpp"

namespace ionrot {

RotationAnsatz::RotationAnsatz(double theta_f, double t_f,
                               std::array<double, 4> c, int n_free)
    : theta_f_(theta_f), t_f_(t_f), c_(c), n_free_(n_free) {
  if (!(t_f > 0)) throw Error("rotation ansatz: t_f must be positive");
  if (n_free < 0 || n_free > 4)
    throw Error("rotation ansatz: n_free must be in 0..4");
  for (int i = n_free; i < 4; ++i) c_[i] = 0.0;
  const double c3 = c_[0], c4 = c_[1], c5 = c_[2], c6 = c_[3];
  amp_[0] = (32 * c3 + 80 * c4 + 144 * c5 + 224 * c6 - 9 * theta_f_) / 16.0;
  amp_[1] = -(48 * c3 + 96 * c4 + 160 * c5 + 240 * c6 - theta_f_) / 16.0;
  amp_[2] = c3;
  amp_[3] = c4;
  amp_[4] = c5;
  amp_[5] = c6;
}

void RotationAnsatz::check_domain(double t) const {
  const double slack = 1e-9 * t_f_;
  if (t < -slack || t > t_f_ + slack)
    throw Error("rotation ansatz: t outside [0, t_f]");
}

double RotationAnsatz::theta(double t) const {
  check_domain(t);
  double s = theta_f_ / 2.0;
  for (std::size_t k = 0; k < amp_.size(); ++k)
    s += amp_[k] * std::cos(harmonics_[k] * M_PI * t / t_f_);
  return s;
}

double RotationAnsatz::theta_dot(double t) const {
  check_domain(t);
  double s = 0.0;
  for (std::size_t k = 0; k < amp_.size(); ++k) {
    const double w = harmonics_[k] * M_PI / t_f_;
    s -= amp_[k] * w * std::sin(w * t);
  }
  return s;
}

double RotationAnsatz::theta_ddot(double t) const {
  check_domain(t);
  double s = 0.0;
  for (std::size_t k = 0; k < amp_.size(); ++k) {
    const double w = harmonics_[k] * M_PI / t_f_;
    s -= amp_[k] * w * w * std::cos(w * t);
  }
  return s;
}

double RotationAnsatz::theta_dddot(double t) const {
  check_domain(t);
  double s = 0.0;
  for (std::size_t k = 0; k < amp_.size(); ++k) {
    const double w = harmonics_[k] * M_PI / t_f_;
    s += amp_[k] * w * w * w * std::sin(w * t);
  }
  return s;
}

double RotationAnsatz::effective_frequency_sq(double omega0, double t) const {
  const double td = theta_dot(t);
  return omega0 * omega0 - td * td;
}

double RotationAnsatz::max_theta_dot_abs(int samples) const {
  double m = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double t = t_f_ * i / (samples - 1);
    m = std::max(m, std::abs(theta_dot(t)));
  }
  return m;
}

} // namespace ionrot
