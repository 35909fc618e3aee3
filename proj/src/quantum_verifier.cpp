#include "ionrot/quantum_verifier.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <mutex>

#include "ionrot/errors.hpp"

namespace ionrot {

namespace {

std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// DFT wavenumber for index i of n samples spaced by ds.
double wavenumber(int i, int n, double ds) {
  const int f = (i < n / 2) ? i : i - n;
  return 2.0 * M_PI * f / (n * ds);
}

} // namespace

Grid2D Grid2D::make(int n1, int n2, double s1_min, double s1_max,
                    double s2_min, double s2_max) {
  if (!power_of_two(n1) || !power_of_two(n2))
    throw Error("Grid2D: point counts must be powers of two");
  if (!(s1_max > s1_min) || !(s2_max > s2_min))
    throw Error("Grid2D: empty extent");
  Grid2D g;
  g.n1 = n1;
  g.n2 = n2;
  g.s1_min = s1_min;
  g.s1_max = s1_max;
  g.s2_min = s2_min;
  g.s2_max = s2_max;
  g.ds1 = (s1_max - s1_min) / n1;
  g.ds2 = (s2_max - s2_min) / n2;
  return g;
}

double Wavefunction2D::norm() const {
  double s = 0.0;
  for (const auto& z : amp) s += std::norm(z);
  return s * grid.cell();
}

void Wavefunction2D::normalize() {
  const double n = norm();
  if (!(n > 0.0)) throw Error("Wavefunction2D: zero norm");
  const double f = 1.0 / std::sqrt(n);
  for (auto& z : amp) z *= f;
}

double Wavefunction2D::mean_s1() const {
  double s = 0.0, nn = 0.0;
  for (int i = 0; i < grid.n1; ++i) {
    double row = 0.0;
    for (int j = 0; j < grid.n2; ++j) row += std::norm(amp[grid.index(i, j)]);
    s += grid.s1(i) * row;
    nn += row;
  }
  return s / nn;
}

double Wavefunction2D::mean_s2() const {
  double s = 0.0, nn = 0.0;
  for (int j = 0; j < grid.n2; ++j) {
    double col = 0.0;
    for (int i = 0; i < grid.n1; ++i) col += std::norm(amp[grid.index(i, j)]);
    s += grid.s2(j) * col;
    nn += col;
  }
  return s / nn;
}

PotentialModel PotentialModel::rigid(const RigidHarmonicTrap& trap,
                                     const IonPair& ions,
                                     std::function<double(double)> theta_dot) {
  PotentialModel m;
  m.trap = RigidHarmonicSpec{trap.k};
  m.m1 = ions.m1;
  m.m2 = ions.m2;
  m.theta_dot = std::move(theta_dot);
  m.clamp_eps = m.d0() / 50.0;
  return m;
}

PotentialModel
PotentialModel::double_well(TiltedDoubleWellSpec spec, const IonPair& ions,
                            double d0, std::function<double(double)> theta_dot,
                            double s0_hint) {
  PotentialModel m;
  m.trap = std::move(spec);
  m.m1 = ions.m1;
  m.m2 = ions.m2;
  m.theta_dot = std::move(theta_dot);
  m.d0_cached_ = d0;
  m.clamp_eps = d0 / 50.0;
  m.s0_hint = s0_hint;
  return m;
}

double PotentialModel::theta_dot_at(double t) const {
  return theta_dot ? theta_dot(t) : 0.0;
}

void PotentialModel::coefficients_at(double t, bool zero_rotation, double& q1,
                                     double& q2, double& lin,
                                     double& quart) const {
  if (const auto* rigid = std::get_if<RigidHarmonicSpec>(&trap)) {
    const double td = zero_rotation ? 0.0 : theta_dot_at(t);
    q1 = 0.5 * (rigid->k - m1 * td * td);
    q2 = 0.5 * (rigid->k - m2 * td * td);
    lin = 0.0;
    quart = 0.0;
  } else {
    // Double-well callables already include the centrifugal term; protocols
    // have theta_dot = 0 at the boundary times where zero_rotation is used.
    const auto& dw = std::get<TiltedDoubleWellSpec>(trap);
    q1 = 0.5 * dw.u1(t);
    q2 = 0.5 * dw.u2(t);
    lin = dw.gamma(t);
    quart = dw.beta;
  }
}

double PotentialModel::d0() const {
  if (d0_cached_ > 0.0) return d0_cached_;
  const auto* rigid = std::get_if<RigidHarmonicSpec>(&trap);
  if (!rigid) throw Error("PotentialModel: d0 unavailable");
  const auto geom =
      equilibrium_harmonic({rigid->k, rigid->k}, cc); // theta_dot = 0
  return geom.d;
}

double potential_at(const PotentialModel& model, double s1, double s2,
                    double t, bool zero_rotation) {
  double q1, q2, lin, quart;
  model.coefficients_at(t, zero_rotation, q1, q2, lin, quart);
  const double sep = std::max(s2 - s1, model.clamp_eps);
  return q1 * s1 * s1 + q2 * s2 * s2 + lin * (s1 + s2) +
         quart * (s1 * s1 * s1 * s1 + s2 * s2 * s2 * s2) + model.cc / sep;
}

namespace {

struct Equilibrium {
  double s1, s2;
  double c1, c2; // per-ion curvature d2V/ds_i^2
};

// Newton iteration on the analytic gradient of the static (t = 0,
// zero-rotation for rigid) potential.
Equilibrium static_equilibrium(const PotentialModel& model) {
  double q1, q2, lin, quart;
  model.coefficients_at(0.0, true, q1, q2, lin, quart);
  const double cc = model.cc;

  double s1, s2;
  if (std::holds_alternative<RigidHarmonicSpec>(model.trap)) {
    const double k = std::get<RigidHarmonicSpec>(model.trap).k;
    const auto geom = equilibrium_harmonic({k, k}, cc);
    s1 = geom.s1;
    s2 = geom.s2;
  } else {
    s1 = model.s0_hint - model.d0() / 2.0;
    s2 = model.s0_hint + model.d0() / 2.0;
  }

  for (int it = 0; it < 200; ++it) {
    const double d = s2 - s1;
    if (!(d > 0)) throw DegenerateGeometry("static_equilibrium: d <= 0");
    const double g1 = 2 * q1 * s1 + lin + 4 * quart * s1 * s1 * s1 + cc / (d * d);
    const double g2 = 2 * q2 * s2 + lin + 4 * quart * s2 * s2 * s2 - cc / (d * d);
    const double cdd = 2 * cc / (d * d * d);
    const double h11 = 2 * q1 + 12 * quart * s1 * s1 + cdd;
    const double h22 = 2 * q2 + 12 * quart * s2 * s2 + cdd;
    const double h12 = -cdd;
    const double det = h11 * h22 - h12 * h12;
    if (det == 0.0) throw Error("static_equilibrium: singular Hessian");
    const double d1 = (h22 * g1 - h12 * g2) / det;
    const double d2 = (h11 * g2 - h12 * g1) / det;
    s1 -= d1;
    s2 -= d2;
    if (std::abs(d1) + std::abs(d2) < 1e-14 * (std::abs(s1) + std::abs(s2) + 1))
      break;
  }
  const double d = s2 - s1;
  const double cdd = 2 * cc / (d * d * d);
  return {s1, s2, 2 * q1 + 12 * quart * s1 * s1 + cdd,
          2 * q2 + 12 * quart * s2 * s2 + cdd};
}

// In-place 2D FFT engine with plans bound to an internal aligned buffer.
class FftEngine {
public:
  FftEngine(int n1, int n2) : n1_(n1), n2_(n2) {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    buf_ = static_cast<fftw_complex*>(
        fftw_malloc(sizeof(fftw_complex) * n1 * n2));
    if (!buf_) throw std::bad_alloc();
    fwd_ = fftw_plan_dft_2d(n1, n2, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_2d(n1, n2, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~FftEngine() {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(buf_);
  }
  FftEngine(const FftEngine&) = delete;
  FftEngine& operator=(const FftEngine&) = delete;

  std::complex<double>* data() {
    return reinterpret_cast<std::complex<double>*>(buf_);
  }
  std::size_t size() const {
    return static_cast<std::size_t>(n1_) * static_cast<std::size_t>(n2_);
  }
  void forward() { fftw_execute(fwd_); }
  void backward() { fftw_execute(bwd_); }

private:
  int n1_, n2_;
  fftw_complex* buf_;
  fftw_plan fwd_, bwd_;
};

// Shared machinery for real- and imaginary-time split stepping.
class SplitOperator {
public:
  SplitOperator(const PotentialModel& model, const Grid2D& grid)
      : model_(model), grid_(grid), fft_(grid.n1, grid.n2) {
    const double hbar = internal::hbar;
    s1_.resize(grid.n1);
    s2_.resize(grid.n2);
    for (int i = 0; i < grid.n1; ++i) s1_[i] = grid.s1(i);
    for (int j = 0; j < grid.n2; ++j) s2_[j] = grid.s2(j);
    kin_.resize(grid.size());
    for (int i = 0; i < grid.n1; ++i) {
      const double p1 = hbar * wavenumber(i, grid.n1, grid.ds1);
      const double t1 = p1 * p1 / (2.0 * model.m1);
      for (int j = 0; j < grid.n2; ++j) {
        const double p2 = hbar * wavenumber(j, grid.n2, grid.ds2);
        kin_[grid.index(i, j)] = t1 + p2 * p2 / (2.0 * model.m2);
      }
    }
    coul_.resize(grid.size());
    for (int i = 0; i < grid.n1; ++i)
      for (int j = 0; j < grid.n2; ++j) {
        const double sep = std::max(s2_[j] - s1_[i], model.clamp_eps);
        coul_[grid.index(i, j)] = model.cc / sep;
      }
    kin_max_ = *std::max_element(kin_.begin(), kin_.end());
  }

  const Grid2D& grid() const { return grid_; }
  double kinetic_max() const { return kin_max_; }

  // Fixes dt and precomputes the time-independent phase tables.  Imaginary
  // time subtracts per-factor reference offsets so the decay exponentials
  // stay representable; the offsets only rescale the norm, which the
  // caller restores every step.
  void prepare(double dt, bool imaginary) {
    const double hbar = internal::hbar;
    dt_ = dt;
    imaginary_ = imaginary;
    kin_phase_.resize(grid_.size());
    coul_phase_.resize(grid_.size());
    const double fft_scale = 1.0 / static_cast<double>(grid_.size());
    const double coul_ref =
        imaginary ? *std::min_element(coul_.begin(), coul_.end()) : 0.0;
    for (std::size_t q = 0; q < grid_.size(); ++q) {
      if (imaginary) {
        kin_phase_[q] = std::exp(-kin_[q] * dt / hbar) * fft_scale;
        coul_phase_[q] = std::exp(-(coul_[q] - coul_ref) * dt / (2.0 * hbar));
      } else {
        kin_phase_[q] = std::polar(fft_scale, -kin_[q] * dt / hbar);
        coul_phase_[q] = std::polar(1.0, -coul_[q] * dt / (2.0 * hbar));
      }
    }
    ax1_.resize(grid_.n1);
    ax2_.resize(grid_.n2);
  }

  // One Strang step; the time-dependent external potential is sampled at
  // t_mid for both half phases.
  void step(std::complex<double>* psi, double t_mid) {
    fill_axis_phases(t_mid);
    apply_potential(psi);
    std::memcpy(fft_.data(), psi, grid_.size() * sizeof(*psi));
    fft_.forward();
    auto* f = fft_.data();
    for (std::size_t q = 0; q < grid_.size(); ++q) f[q] *= kin_phase_[q];
    fft_.backward();
    std::memcpy(psi, fft_.data(), grid_.size() * sizeof(*psi));
    apply_potential(psi);
  }

  double energy(const std::complex<double>* psi, double t,
                bool zero_rotation) {
    double q1, q2, lin, quart;
    model_.coefficients_at(t, zero_rotation, q1, q2, lin, quart);
    double vsum = 0.0, nsum = 0.0;
    for (int i = 0; i < grid_.n1; ++i) {
      const double x = s1_[i];
      const double a1 = q1 * x * x + lin * x + quart * x * x * x * x;
      for (int j = 0; j < grid_.n2; ++j) {
        const double y = s2_[j];
        const double a2 = q2 * y * y + lin * y + quart * y * y * y * y;
        const std::size_t q = grid_.index(i, j);
        const double w = std::norm(psi[q]);
        vsum += (a1 + a2 + coul_[q]) * w;
        nsum += w;
      }
    }
    std::memcpy(fft_.data(), psi, grid_.size() * sizeof(*psi));
    fft_.forward();
    const auto* f = fft_.data();
    double tsum = 0.0, knorm = 0.0;
    for (std::size_t q = 0; q < grid_.size(); ++q) {
      const double w = std::norm(f[q]);
      tsum += kin_[q] * w;
      knorm += w;
    }
    return vsum / nsum + tsum / knorm;
  }

  // Integrated |psi|^2 over the outermost two rows/columns.
  double edge_weight(const std::complex<double>* psi) const {
    double s = 0.0;
    for (int i = 0; i < grid_.n1; ++i)
      for (int j : {0, 1, grid_.n2 - 2, grid_.n2 - 1})
        s += std::norm(psi[grid_.index(i, j)]);
    for (int j = 2; j < grid_.n2 - 2; ++j)
      for (int i : {0, 1, grid_.n1 - 2, grid_.n1 - 1})
        s += std::norm(psi[grid_.index(i, j)]);
    return s * grid_.cell();
  }

  // Integrated |psi|^2 where the ions are closer than the Coulomb clamp.
  double clamp_weight(const std::complex<double>* psi) const {
    double s = 0.0;
    for (int i = 0; i < grid_.n1; ++i)
      for (int j = 0; j < grid_.n2; ++j)
        if (s2_[j] - s1_[i] < model_.clamp_eps)
          s += std::norm(psi[grid_.index(i, j)]);
    return s * grid_.cell();
  }

  double norm(const std::complex<double>* psi) const {
    double s = 0.0;
    for (std::size_t q = 0; q < grid_.size(); ++q) s += std::norm(psi[q]);
    return s * grid_.cell();
  }

private:
  void fill_axis_phases(double t) {
    const double hbar = internal::hbar;
    double q1, q2, lin, quart;
    model_.coefficients_at(t, false, q1, q2, lin, quart);
    auto fill = [&](std::vector<std::complex<double>>& out,
                    const std::vector<double>& s, double q) {
      scratch_.resize(s.size());
      for (std::size_t i = 0; i < s.size(); ++i) {
        const double x = s[i];
        scratch_[i] = q * x * x + lin * x + quart * x * x * x * x;
      }
      const double ref =
          imaginary_ ? *std::min_element(scratch_.begin(), scratch_.end())
                     : 0.0;
      for (std::size_t i = 0; i < s.size(); ++i)
        out[i] = imaginary_
                     ? std::complex<double>(
                           std::exp(-(scratch_[i] - ref) * dt_ / (2 * hbar)))
                     : std::polar(1.0, -scratch_[i] * dt_ / (2 * hbar));
    };
    fill(ax1_, s1_, q1);
    fill(ax2_, s2_, q2);
  }

  void apply_potential(std::complex<double>* psi) {
    for (int i = 0; i < grid_.n1; ++i) {
      const auto p1 = ax1_[i];
      const std::size_t base = grid_.index(i, 0);
      for (int j = 0; j < grid_.n2; ++j)
        psi[base + j] *= p1 * ax2_[j] * coul_phase_[base + j];
    }
  }

  const PotentialModel& model_;
  Grid2D grid_;
  FftEngine fft_;
  std::vector<double> s1_, s2_;
  std::vector<double> kin_;
  std::vector<double> coul_;
  std::vector<std::complex<double>> kin_phase_, coul_phase_;
  std::vector<std::complex<double>> ax1_, ax2_;
  std::vector<double> scratch_;
  double kin_max_ = 0.0;
  double dt_ = 0.0;
  bool imaginary_ = false;
};

} // namespace

Grid2D make_grid_static(const PotentialModel& model, const SimConfig& cfg) {
  const auto eq = static_equilibrium(model);
  const double hbar = internal::hbar;
  const double sig1 = std::sqrt(hbar / (2.0 * model.m1 *
                                        std::sqrt(eq.c1 / model.m1)));
  const double sig2 = std::sqrt(hbar / (2.0 * model.m2 *
                                        std::sqrt(eq.c2 / model.m2)));
  const double m = cfg.margin_sigmas;
  return Grid2D::make(cfg.n1, cfg.n2, eq.s1 - m * sig1, eq.s1 + m * sig1,
                      eq.s2 - m * sig2, eq.s2 + m * sig2);
}

Grid2D make_grid(const PotentialModel& model, const RotationAnsatz& protocol,
                 const SimConfig& cfg) {
  const auto eq0 = static_equilibrium(model);
  const double d0 = eq0.s2 - eq0.s1;
  double lo1 = eq0.s1, hi1 = eq0.s1, lo2 = eq0.s2, hi2 = eq0.s2;

  if (const auto* rigid = std::get_if<RigidHarmonicSpec>(&model.trap)) {
    const int samples = 2001;
    for (int q = 0; q <= samples; ++q) {
      const double t = protocol.t_f() * q / samples;
      const double td = protocol.theta_dot(t);
      const EffectiveSprings u{rigid->k - model.m1 * td * td,
                               rigid->k - model.m2 * td * td};
      if (!(u.u1 > 0) || !(u.u2 > 0)) continue; // transiently inverted
      const auto g = equilibrium_harmonic(u, model.cc);
      const double cap = cfg.drift_cap * d0;
      lo1 = std::min(lo1, std::max(g.s1, eq0.s1 - cap));
      hi1 = std::max(hi1, std::min(g.s1, eq0.s1 + cap));
      lo2 = std::min(lo2, std::max(g.s2, eq0.s2 - cap));
      hi2 = std::max(hi2, std::min(g.s2, eq0.s2 + cap));
    }
  }

  const double hbar = internal::hbar;
  const double sig1 =
      std::sqrt(hbar / (2.0 * model.m1 * std::sqrt(eq0.c1 / model.m1)));
  const double sig2 =
      std::sqrt(hbar / (2.0 * model.m2 * std::sqrt(eq0.c2 / model.m2)));
  const double m = cfg.margin_sigmas;
  return Grid2D::make(cfg.n1, cfg.n2, lo1 - m * sig1, hi1 + m * sig1,
                      lo2 - m * sig2, hi2 + m * sig2);
}

double step_policy(const PotentialModel& model, const RotationAnsatz& protocol,
                   const Grid2D& grid) {
  const double hbar = internal::hbar;
  const double tf = protocol.t_f();

  double omega_plus_max = 0.0;
  const IonPair ions{model.m1, model.m2};
  if (const auto* rigid = std::get_if<RigidHarmonicSpec>(&model.trap)) {
    const int samples = 512;
    for (int q = 0; q <= samples; ++q) {
      const double t = tf * q / samples;
      const double td = protocol.theta_dot(t);
      const EffectiveSprings u{rigid->k - model.m1 * td * td,
                               rigid->k - model.m2 * td * td};
      if (!(u.u1 > 0) || !(u.u2 > 0)) continue;
      const auto g = equilibrium_harmonic(u, model.cc);
      const auto v = hessian_harmonic(u, ions, g, model.cc);
      omega_plus_max =
          std::max(omega_plus_max, std::sqrt(sym2_eigenvalues(v).first));
    }
  } else {
    const auto eq = static_equilibrium(model);
    omega_plus_max = std::sqrt(
        std::max(eq.c1 / model.m1, eq.c2 / model.m2) + 1e-300);
  }

  const double t1 = hbar * hbar * M_PI * M_PI / (2.0 * model.m1 * grid.ds1 * grid.ds1);
  const double t2 = hbar * hbar * M_PI * M_PI / (2.0 * model.m2 * grid.ds2 * grid.ds2);
  const double kinetic_cap = hbar * M_PI / (4.0 * (t1 + t2));
  double dt = tf / 4000.0;
  if (omega_plus_max > 0)
    dt = std::min(dt, 2.0 * M_PI / (100.0 * omega_plus_max));
  dt = std::min(dt, kinetic_cap);
  return dt;
}

GroundStateResult ground_state(const PotentialModel& model, const Grid2D& grid,
                               const SimConfig& cfg) {
  const double hbar = internal::hbar;
  const auto eq = static_equilibrium(model);
  const double w1 = std::sqrt(eq.c1 / model.m1);
  const double w2 = std::sqrt(eq.c2 / model.m2);
  const double omega_ref = std::max(w1, w2);
  const double dtau = cfg.imag_dtau_factor / omega_ref;

  // Static model view: theta_dot stripped so the split kernel sees the
  // t = 0 lab-frame trap at every substep.
  PotentialModel static_model = model;
  static_model.theta_dot = {};

  GroundStateResult out;
  out.psi.grid = grid;
  out.psi.amp.resize(grid.size());
  const double sig1 = std::sqrt(hbar / (2.0 * model.m1 * w1));
  const double sig2 = std::sqrt(hbar / (2.0 * model.m2 * w2));
  for (int i = 0; i < grid.n1; ++i)
    for (int j = 0; j < grid.n2; ++j) {
      const double x = (grid.s1(i) - eq.s1) / sig1;
      const double y = (grid.s2(j) - eq.s2) / sig2;
      out.psi.amp[grid.index(i, j)] = std::exp(-0.25 * (x * x + y * y));
    }
  out.psi.normalize();

  SplitOperator op(static_model, grid);
  op.prepare(dtau, /*imaginary=*/true);
  auto* psi = out.psi.amp.data();

  double e_prev = op.energy(psi, 0.0, true);
  out.energy_trace.push_back(e_prev);
  const int check_every = 4;
  int step = 0;
  for (; step < cfg.steps_cap_imaginary; ++step) {
    op.step(psi, 0.0);
    out.psi.normalize();
    if ((step + 1) % check_every == 0) {
      const double e = op.energy(psi, 0.0, true);
      out.energy_trace.push_back(e);
      const double rel =
          std::abs(e - e_prev) / (check_every * std::max(std::abs(e), 1e-300));
      e_prev = e;
      if (rel < 1e-12) {
        ++step;
        break;
      }
    }
  }
  if (step >= cfg.steps_cap_imaginary)
    throw Error("ground_state: not converged within step cap; last energies " +
                std::to_string(out.energy_trace[out.energy_trace.size() - 2]) +
                " -> " + std::to_string(out.energy_trace.back()));
  out.steps = step;
  out.energy = e_prev;
  return out;
}

PropagationResult propagate(const PotentialModel& model,
                            const Wavefunction2D& psi0,
                            const RotationAnsatz& protocol,
                            const SimConfig& cfg) {
  const Grid2D& grid = psi0.grid;
  const double tf = protocol.t_f();
  double dt = cfg.dt_override > 0 ? cfg.dt_override
                                  : step_policy(model, protocol, grid);
  const int n_steps = static_cast<int>(std::ceil(tf / dt - 1e-12));
  dt = tf / n_steps;

  PropagationResult out;
  out.dt = dt;
  out.steps = n_steps;
  out.psi = psi0;
  auto* psi = out.psi.amp.data();

  SplitOperator op(model, grid);
  op.prepare(dt, /*imaginary=*/false);

  const int samples = std::max(2, cfg.time_samples);
  std::vector<int> sample_steps(samples);
  for (int s = 0; s < samples; ++s)
    sample_steps[s] = static_cast<int>(
        std::llround(static_cast<double>(s) * n_steps / (samples - 1)));

  const double norm0 = op.norm(psi);
  out.energy_initial = op.energy(psi, 0.0, true);

  auto record = [&](double t) {
    out.obs.t.push_back(t);
    out.obs.norm.push_back(op.norm(psi));
    out.obs.energy.push_back(op.energy(psi, t, false));
    out.obs.mean_s1.push_back(out.psi.mean_s1());
    out.obs.mean_s2.push_back(out.psi.mean_s2());
  };
  auto check_bands = [&](int at_step) {
    const double edge = op.edge_weight(psi);
    const double cl = op.clamp_weight(psi);
    out.edge_weight = std::max(out.edge_weight, edge);
    out.clamp_weight = std::max(out.clamp_weight, cl);
    if (cfg.soft_bands) return;
    if (edge > cfg.edge_threshold)
      throw ResolutionError("propagate: edge band holds " +
                            std::to_string(edge) + " after step " +
                            std::to_string(at_step));
    if (cl > cfg.edge_threshold)
      throw ResolutionError("propagate: Coulomb clamp band holds " +
                            std::to_string(cl) + " after step " +
                            std::to_string(at_step));
  };

  int next_sample = 0;
  if (sample_steps[next_sample] == 0) {
    record(0.0);
    ++next_sample;
  }
  for (int s = 0; s < n_steps; ++s) {
    op.step(psi, (s + 0.5) * dt);
    const int done = s + 1;
    if (next_sample < samples && sample_steps[next_sample] == done) {
      record(done * dt);
      ++next_sample;
    }
    if (done % 1000 == 0 || done == n_steps) {
      // drift budget: 1e-8 per 1000 steps, pro-rated
      const double drift = std::abs(op.norm(psi) - norm0);
      const double budget = 1e-8 * std::max(1.0, done / 1000.0);
      if (drift > budget)
        throw ResolutionError("propagate: norm drift " +
                              std::to_string(drift) + " after " +
                              std::to_string(done) + " steps");
      check_bands(done);
    }
  }

  out.norm_drift = std::abs(op.norm(psi) - norm0);
  out.energy_final = op.energy(psi, tf, /*zero_rotation=*/true);
  out.excess_energy = out.energy_final - out.energy_initial;
  return out;
}

double excess_energy(const PropagationResult& run) {
  return run.excess_energy;
}

double edge_band_weight(const Wavefunction2D& psi) {
  const Grid2D& g = psi.grid;
  double s = 0.0;
  for (int i = 0; i < g.n1; ++i)
    for (int j : {0, 1, g.n2 - 2, g.n2 - 1}) s += std::norm(psi.amp[g.index(i, j)]);
  for (int j = 2; j < g.n2 - 2; ++j)
    for (int i : {0, 1, g.n1 - 2, g.n1 - 1})
      s += std::norm(psi.amp[g.index(i, j)]);
  return s * g.cell();
}

double clamp_band_weight(const Wavefunction2D& psi, double clamp_eps) {
  const Grid2D& g = psi.grid;
  double s = 0.0;
  for (int i = 0; i < g.n1; ++i)
    for (int j = 0; j < g.n2; ++j)
      if (g.s2(j) - g.s1(i) < clamp_eps) s += std::norm(psi.amp[g.index(i, j)]);
  return s * g.cell();
}

double energy_expectation(const PotentialModel& model,
                          const Wavefunction2D& psi, double t,
                          bool zero_rotation) {
  SplitOperator op(model, psi.grid);
  return op.energy(psi.amp.data(), t, zero_rotation);
}

void dump_wavefunction(const Wavefunction2D& psi, const std::string& path_bin,
                       const std::string& path_json) {
  std::ofstream bin(path_bin, std::ios::binary);
  if (!bin) throw Error("dump_wavefunction: cannot open " + path_bin);
  for (const auto& z : psi.amp) {
    const double re = z.real(), im = z.imag();
    bin.write(reinterpret_cast<const char*>(&re), sizeof re);
    bin.write(reinterpret_cast<const char*>(&im), sizeof im);
  }
  std::ofstream js(path_json);
  if (!js) throw Error("dump_wavefunction: cannot open " + path_json);
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "{\n  \"n1\": %d,\n  \"n2\": %d,\n  \"s1_min\": %.17g,\n"
                "  \"s1_max\": %.17g,\n  \"s2_min\": %.17g,\n  \"s2_max\": "
                "%.17g,\n  \"ds1\": %.17g,\n  \"ds2\": %.17g,\n"
                "  \"layout\": \"row-major, s1-major, little-endian f64 "
                "re/im pairs\"\n}\n",
                psi.grid.n1, psi.grid.n2, psi.grid.s1_min, psi.grid.s1_max,
                psi.grid.s2_min, psi.grid.s2_max, psi.grid.ds1, psi.grid.ds2);
  js << buf;
}

} // namespace ionrot
