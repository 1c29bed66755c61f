#pragma once

// Shared fixtures and independent oracles for the test suites. Everything in
// here is deliberately decoupled from the library implementation paths it is
// used to check: finite differences for gradients, dense Fock-space matrices
// for operator algebra, RK4 phase-space integration for driven-oscillator
// phases, and closed forms for single-ion Penning modes.

#include <Eigen/Dense>
#include <complex>
#include <random>
#include <vector>

#include "ionpa/ionpa.hpp"

namespace support {

using complexd = std::complex<double>;

inline double be9_mass() { return 9.012182 * ionpa::constants::atomic_mass_unit; }

// ---- standard configurations ----------------------------------------------

inline ionpa::TrapConfig paul_chain(int n_ions, double fz_hz = 1.0e6,
                                    double fr_hz = 3.0e6) {
  ionpa::TrapConfig t;
  t.trap_kind = ionpa::TrapKind::paul_pseudopotential;
  t.axial_freq = ionpa::constants::two_pi * fz_hz;
  t.radial_freq_x = ionpa::constants::two_pi * fr_hz;
  t.radial_freq_y = ionpa::constants::two_pi * (fr_hz * 1.07);
  t.ion_mass = be9_mass();
  t.ion_charge = ionpa::constants::elementary_charge;
  t.n_ions = n_ions;
  return t;
}

inline ionpa::TrapConfig penning_base(int n_ions, double fr_hz,
                                      double wall = 0.015, double c4 = 0.0,
                                      double fz_hz = 1.62e6) {
  ionpa::TrapConfig t;
  t.trap_kind = ionpa::TrapKind::penning;
  t.magnetic_field = 4.4588;
  t.axial_freq = ionpa::constants::two_pi * fz_hz;
  t.rotation_freq = ionpa::constants::two_pi * fr_hz;
  t.wall_strength = wall;
  t.anharmonic_c4 = c4;
  t.ion_mass = be9_mass();
  t.ion_charge = ionpa::constants::elementary_charge;
  t.n_ions = n_ions;
  return t;
}

// Planar (2D) crystal: weak planar confinement.
inline ionpa::TrapConfig penning_planar(int n_ions = 19) {
  return penning_base(n_ions, 180.0e3, 0.003);
}

// 3D spheroid at reduced ion number (trap parameters of the 120-ion case).
inline ionpa::TrapConfig penning_3d(int n_ions = 40) {
  return penning_base(n_ions, 400.0e3, 0.015);
}

// Two-plane crystal: a weak harmonic axial well dominated by the quartic
// term forms a flat-bottomed slab that splits into two well-separated
// layers (30/30 at these parameters, gap ~15 um).
inline ionpa::TrapConfig penning_bilayer(int n_ions = 60) {
  return penning_base(n_ions, 28.0e3, 0.003, 2.0, 400.0e3);
}

struct Crystal {
  ionpa::TrapConfig cfg;
  ionpa::CrystalEquilibrium eq;
  ionpa::ModeSpectrum spec;
};

inline const Crystal& cached_crystal(const ionpa::TrapConfig& cfg,
                                     std::uint64_t seed, int restarts,
                                     std::vector<Crystal>& cache) {
  for (const auto& c : cache)
    if (c.cfg.n_ions == cfg.n_ions && c.cfg.trap_kind == cfg.trap_kind &&
        c.cfg.rotation_freq == cfg.rotation_freq &&
        c.cfg.anharmonic_c4 == cfg.anharmonic_c4 &&
        c.cfg.wall_strength == cfg.wall_strength &&
        c.cfg.radial_freq_x == cfg.radial_freq_x)
      return c;
  Crystal c{cfg, ionpa::solve_equilibrium(cfg, seed, restarts),
            ionpa::ModeSpectrum{}};
  c.spec = ionpa::compute_modes(cfg, c.eq);
  cache.push_back(std::move(c));
  return cache.back();
}

inline std::vector<Crystal>& crystal_cache() {
  static std::vector<Crystal> cache;
  return cache;
}

inline const Crystal& get_crystal(const ionpa::TrapConfig& cfg,
                                  std::uint64_t seed = 7, int restarts = 4) {
  return cached_crystal(cfg, seed, restarts, crystal_cache());
}

// ---- finite-difference gradient oracle -------------------------------------

inline Eigen::VectorXd fd_gradient(const ionpa::PotentialFunction& pot,
                                   const Eigen::VectorXd& x, double h = 1e-6) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x, xm = x;
  for (int i = 0; i < x.size(); ++i) {
    xp[i] += h;
    xm[i] -= h;
    g[i] = (pot.energy(xp) - pot.energy(xm)) / (2.0 * h);
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return g;
}

// ---- single-ion Penning closed forms ---------------------------------------

struct SingleIonModes {
  double axial;
  double plus;    // modified cyclotron (rotating frame)
  double minus;   // magnetron-like (rotating frame)
  double l_axial;
  double l_planar;  // same for both circular modes
};

inline SingleIonModes single_ion_penning(const ionpa::TrapConfig& cfg) {
  const double wz = cfg.axial_freq;
  const double wB = cfg.cyclotron_freq() - 2.0 * cfg.rotation_freq;
  const double wrho2 = cfg.planar_beta() * wz * wz;  // wall = 0 assumed
  const double bar = std::sqrt(wB * wB + 4.0 * wrho2);
  SingleIonModes m;
  m.axial = wz;
  m.plus = 0.5 * (bar + wB);
  m.minus = 0.5 * (bar - wB);
  m.l_axial = std::sqrt(ionpa::constants::hbar / (2.0 * cfg.ion_mass * wz));
  m.l_planar = std::sqrt(ionpa::constants::hbar / (cfg.ion_mass * bar));
  return m;
}

// ---- driven-oscillator phase-space oracle -----------------------------------

// H_I(t) = C e^{i delta t} a + C* e^{-i delta t} a^dag acting on |0>:
// coherent amplitude beta' = -i C* e^{-i delta t}, global phase
// phi(t) = Im int beta* dbeta. Integrated with fixed-step RK4.
struct DrivenPhaseResult {
  complexd beta;
  double phase;
};

inline DrivenPhaseResult driven_phase(complexd C, double delta, double tau,
                                      int steps = 40000) {
  const double h = tau / steps;
  complexd beta(0.0, 0.0);
  double phase = 0.0;
  const complexd mi(0.0, -1.0);
  const auto dbeta = [&](double t) {
    return mi * std::conj(C) * std::exp(complexd(0.0, -delta * t));
  };
  for (int s = 0; s < steps; ++s) {
    const double t = s * h;
    const complexd k1 = dbeta(t);
    const complexd k2 = dbeta(t + 0.5 * h);
    const complexd k4 = dbeta(t + h);
    // phase integrand Im(beta^* beta'):
    const complexd b1 = beta;
    const complexd b2 = beta + 0.5 * h * k1;
    const complexd b3 = beta + 0.5 * h * k2;
    const complexd b4 = beta + h * k2;
    const double p1 = std::imag(std::conj(b1) * k1);
    const double p2 = std::imag(std::conj(b2) * k2);
    const double p3 = std::imag(std::conj(b3) * k2);
    const double p4 = std::imag(std::conj(b4) * k4);
    beta += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k2 + k4);
    phase += (h / 6.0) * (p1 + 2.0 * p2 + 2.0 * p3 + p4);
  }
  return {beta, phase};
}

// ---- dense Fock-space operator oracle ---------------------------------------

// Operators on n_modes bosonic modes truncated at n_max quanta per mode.
class FockSpace {
 public:
  FockSpace(int n_modes, int n_max) : n_modes_(n_modes), n_max_(n_max) {
    dim_ = 1;
    for (int m = 0; m < n_modes; ++m) dim_ *= (n_max + 1);
  }

  int dim() const { return dim_; }
  int n_modes() const { return n_modes_; }
  int n_max() const { return n_max_; }

  int occupation(int state, int mode) const {
    int s = state;
    for (int m = 0; m < mode; ++m) s /= (n_max_ + 1);
    return s % (n_max_ + 1);
  }

  int total_occupation(int state) const {
    int tot = 0;
    for (int m = 0; m < n_modes_; ++m) tot += occupation(state, m);
    return tot;
  }

  Eigen::MatrixXcd annihilation(int mode) const {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(dim_, dim_);
    int stride = 1;
    for (int m = 0; m < mode; ++m) stride *= (n_max_ + 1);
    for (int s = 0; s < dim_; ++s) {
      const int occ = occupation(s, mode);
      if (occ > 0) a(s - stride, s) = std::sqrt(static_cast<double>(occ));
    }
    return a;
  }

 private:
  int n_modes_, n_max_, dim_;
};

// Dense matrix of one Harmonic with spins frozen to signs s_j.
inline Eigen::MatrixXcd harmonic_matrix(const ionpa::Harmonic& hl,
                                        const FockSpace& fock,
                                        const Eigen::VectorXd& spin_signs) {
  const int m = fock.n_modes();
  std::vector<Eigen::MatrixXcd> a(m), ad(m);
  for (int k = 0; k < m; ++k) {
    a[k] = fock.annihilation(k);
    ad[k] = a[k].adjoint();
  }
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(fock.dim(), fock.dim());
  for (int n = 0; n < m; ++n) {
    for (int q = 0; q < m; ++q) {
      if (hl.number(n, q) != 0.0) H += hl.number(n, q) * ad[n] * a[q];
      if (hl.pair_create(n, q) != 0.0) H += hl.pair_create(n, q) * ad[n] * ad[q];
      if (hl.pair_annihilate(n, q) != 0.0)
        H += hl.pair_annihilate(n, q) * a[n] * a[q];
    }
    complexd lin_a = hl.lin_a(n), lin_ad = hl.lin_adag(n);
    for (int j = 0; j < spin_signs.size(); ++j) {
      lin_a += hl.sdf_a(n, j) * spin_signs[j];
      lin_ad += hl.sdf_adag(n, j) * spin_signs[j];
    }
    if (lin_a != 0.0) H += lin_a * a[n];
    if (lin_ad != 0.0) H += lin_ad * ad[n];
  }
  return H;
}

}  // namespace support
