#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <string>
#include <vector>

#include "ionpa/constants.hpp"
#include "ionpa/errors.hpp"

namespace ionpa {

enum class TrapKind { penning, paul_pseudopotential };

enum class Frame { lab, rotating };

// Physical trap and crystal description. All frequencies in rad/s, SI units
// throughout; conversion to the dimensionless internal system happens in
// build_effective_potential.
struct TrapConfig {
  TrapKind trap_kind = TrapKind::paul_pseudopotential;
  double magnetic_field = 0.0;   // T (Penning)
  double axial_freq = 0.0;       // rad/s, omega_z
  double radial_freq_x = 0.0;    // rad/s (Paul)
  double radial_freq_y = 0.0;    // rad/s (Paul)
  double rotation_freq = 0.0;    // rad/s, omega_r (Penning, cyclotron sense)
  double wall_strength = 0.0;    // dimensionless delta_wall (Penning)
  double anharmonic_c4 = 0.0;    // dimensionless quartic axial coefficient
  double ion_mass = 0.0;         // kg
  double ion_charge = 0.0;       // C
  int n_ions = 0;

  double cyclotron_freq() const { return ion_charge * magnetic_field / ion_mass; }

  // Rotating-frame planar confinement coefficient, in units of m omega_z^2:
  //   beta = omega_r (omega_c - omega_r) / omega_z^2 - 1/2.
  // The crystal rotation is taken in the same sense as the cyclotron motion,
  // so the velocity coupling in the rotating frame is omega_c - 2 omega_r.
  double planar_beta() const {
    const double wc = cyclotron_freq();
    return rotation_freq * (wc - rotation_freq) / (axial_freq * axial_freq) - 0.5;
  }

  // Characteristic Coulomb length l0 = (q^2 / (4 pi eps0 m omega_z^2))^(1/3).
  double length_scale() const {
    const double k = ion_charge * ion_charge /
                     (4.0 * constants::pi * constants::epsilon0);
    return std::cbrt(k / (ion_mass * axial_freq * axial_freq));
  }

  double energy_scale() const {
    const double l0 = length_scale();
    return ion_mass * axial_freq * axial_freq * l0 * l0;
  }

  void validate() const {
    if (n_ions < 1) throw ConfigError("n_ions must be >= 1");
    if (ion_mass <= 0.0) throw ConfigError("ion_mass must be positive");
    if (ion_charge <= 0.0) throw ConfigError("ion_charge must be positive");
    if (axial_freq <= 0.0) throw ConfigError("axial_freq must be positive");
    if (trap_kind == TrapKind::paul_pseudopotential) {
      if (radial_freq_x <= 0.0 || radial_freq_y <= 0.0)
        throw ConfigError("paul trap requires positive radial_freqs");
    } else {
      if (magnetic_field <= 0.0)
        throw ConfigError("penning trap requires positive magnetic_field");
      if (rotation_freq <= 0.0)
        throw ConfigError("penning trap requires positive rotation_freq");
      const double beta = planar_beta();
      if (beta + wall_strength <= 0.0 || beta - wall_strength <= 0.0)
        throw UnstableConfinementError(
            "penning planar confinement non-positive: beta=" +
            std::to_string(beta) + ", wall=" + std::to_string(wall_strength));
    }
  }
};

// Total potential over 3N dimensionless coordinates (lengths in l0, energies
// in m omega_z^2 l0^2). Layout: coordinate 3j+a for ion j, axis a in {x,y,z}.
// Single-particle part is 1/2 (kx x^2 + ky y^2 + z^2) + c4 z^4 per ion;
// pairwise Coulomb is 1/r in these units.
class PotentialFunction {
 public:
  PotentialFunction(int n_ions, double kx, double ky, double c4)
      : n_(n_ions), kx_(kx), ky_(ky), c4_(c4) {}

  int n_ions() const { return n_; }
  double kx() const { return kx_; }
  double ky() const { return ky_; }
  double quartic_c4() const { return c4_; }

  double energy(const Eigen::VectorXd& xi) const {
    double e = 0.0;
    for (int j = 0; j < n_; ++j) {
      const double x = xi[3 * j], y = xi[3 * j + 1], z = xi[3 * j + 2];
      e += 0.5 * (kx_ * x * x + ky_ * y * y + z * z) + c4_ * z * z * z * z;
    }
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j)
        e += 1.0 / pair_distance(xi, i, j);
    return e;
  }

  void gradient(const Eigen::VectorXd& xi, Eigen::VectorXd& g) const {
    g.setZero(3 * n_);
    for (int j = 0; j < n_; ++j) {
      const double x = xi[3 * j], y = xi[3 * j + 1], z = xi[3 * j + 2];
      g[3 * j] = kx_ * x;
      g[3 * j + 1] = ky_ * y;
      g[3 * j + 2] = z + 4.0 * c4_ * z * z * z;
    }
    for (int i = 0; i < n_; ++i) {
      for (int j = i + 1; j < n_; ++j) {
        Eigen::Vector3d d = xi.segment<3>(3 * i) - xi.segment<3>(3 * j);
        const double r = d.norm();
        const Eigen::Vector3d f = d / (r * r * r);
        g.segment<3>(3 * i) -= f;
        g.segment<3>(3 * j) += f;
      }
    }
  }

  void hessian(const Eigen::VectorXd& xi, Eigen::MatrixXd& h) const {
    h.setZero(3 * n_, 3 * n_);
    for (int j = 0; j < n_; ++j) {
      const double z = xi[3 * j + 2];
      h(3 * j, 3 * j) = kx_;
      h(3 * j + 1, 3 * j + 1) = ky_;
      h(3 * j + 2, 3 * j + 2) = 1.0 + 12.0 * c4_ * z * z;
    }
    for (int i = 0; i < n_; ++i) {
      for (int j = i + 1; j < n_; ++j) {
        Eigen::Vector3d d = xi.segment<3>(3 * i) - xi.segment<3>(3 * j);
        const double r = d.norm();
        const double r3 = r * r * r, r5 = r3 * r * r;
        // block of d^2(1/r)/dri dri = (3 dd^T - r^2 I)/r^5
        Eigen::Matrix3d blk =
            3.0 * d * d.transpose() / r5 - Eigen::Matrix3d::Identity() / r3;
        h.block<3, 3>(3 * i, 3 * i) += blk;
        h.block<3, 3>(3 * j, 3 * j) += blk;
        h.block<3, 3>(3 * i, 3 * j) -= blk;
        h.block<3, 3>(3 * j, 3 * i) -= blk;
      }
    }
  }

 private:
  static double pair_distance(const Eigen::VectorXd& xi, int i, int j) {
    return (xi.segment<3>(3 * i) - xi.segment<3>(3 * j)).norm();
  }

  int n_;
  double kx_, ky_, c4_;
};

inline PotentialFunction build_effective_potential(const TrapConfig& cfg) {
  cfg.validate();
  if (cfg.trap_kind == TrapKind::paul_pseudopotential) {
    const double ax = std::pow(cfg.radial_freq_x / cfg.axial_freq, 2);
    const double ay = std::pow(cfg.radial_freq_y / cfg.axial_freq, 2);
    return PotentialFunction(cfg.n_ions, ax, ay, cfg.anharmonic_c4);
  }
  const double beta = cfg.planar_beta();
  return PotentialFunction(cfg.n_ions, beta + cfg.wall_strength,
                           beta - cfg.wall_strength, cfg.anharmonic_c4);
}

// Converged crystal configuration. Positions are SI meters in the working
// frame (rotating frame for Penning traps), grouped (x_j, y_j, z_j).
struct CrystalEquilibrium {
  Eigen::VectorXd positions;  // 3N, meters
  Frame frame = Frame::lab;
  double potential_energy = 0.0;  // J
  double gradient_norm = 0.0;     // N
  int n_ions = 0;
  std::uint64_t seed = 0;

  double x(int j) const { return positions[3 * j]; }
  double y(int j) const { return positions[3 * j + 1]; }
  double z(int j) const { return positions[3 * j + 2]; }
};

namespace detail {

// Limited-memory BFGS with Armijo backtracking. Works on the dimensionless
// potential; used only to get near the basin before Newton polishing.
// energy_trace, when given, records the energy after every accepted step.
inline bool lbfgs_minimize(const PotentialFunction& pot, Eigen::VectorXd& x,
                           double grad_tol, int max_iter, double* energy_out,
                           std::vector<double>* energy_trace = nullptr) {
  const int dim = static_cast<int>(x.size());
  const int memory = 10;
  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;

  Eigen::VectorXd g(dim), g_new(dim), q(dim), z(dim), x_new(dim);
  double f = pot.energy(x);
  pot.gradient(x, g);

  for (int iter = 0; iter < max_iter; ++iter) {
    if (g.norm() <= grad_tol) {
      *energy_out = f;
      return true;
    }
    // two-loop recursion
    q = g;
    std::vector<double> alpha(s_hist.size());
    for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alpha[i] * y_hist[i];
    }
    double gamma = 1.0;
    if (!s_hist.empty()) {
      const auto& s = s_hist.back();
      const auto& y = y_hist.back();
      gamma = s.dot(y) / y.squaredNorm();
    }
    z = gamma * q;
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(z);
      z += (alpha[i] - beta) * s_hist[i];
    }
    Eigen::VectorXd dir = -z;
    double dg = dir.dot(g);
    if (dg >= 0.0) {  // not a descent direction; reset
      dir = -g;
      dg = -g.squaredNorm();
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }
    // clamp the trial displacement to one length unit per ion coordinate;
    // unbounded first steps from overlapping seeds can throw ions over an
    // anharmonic rim
    const double dmax = dir.cwiseAbs().maxCoeff();
    if (dmax > 1.0) {
      dir /= dmax;
      dg /= dmax;
    }

    double step = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = x + step * dir;
      const double f_new = pot.energy(x_new);
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * dg) {
        pot.gradient(x_new, g_new);
        Eigen::VectorXd s = x_new - x;
        Eigen::VectorXd y = g_new - g;
        const double sy = s.dot(y);
        if (sy > 1e-14 * s.norm() * y.norm()) {
          s_hist.push_back(std::move(s));
          y_hist.push_back(std::move(y));
          rho_hist.push_back(1.0 / sy);
          if (static_cast<int>(s_hist.size()) > memory) {
            s_hist.pop_front();
            y_hist.pop_front();
            rho_hist.pop_front();
          }
        }
        x = x_new;
        f = f_new;
        g = g_new;
        accepted = true;
        if (energy_trace) energy_trace->push_back(f);
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // line search stalled; hand over to Newton
    // confining potentials are strictly positive away from N=1; negative
    // energy means an ion escaped over an anharmonic rim
    if (f < 0.0) {
      *energy_out = f;
      return false;
    }
  }
  *energy_out = f;
  return g.norm() <= grad_tol;
}

// Damped Newton polish; quadratic convergence once in the basin. Accepts a
// step only if the energy does not increase, so the total energy trace stays
// monotone.
inline bool newton_polish(const PotentialFunction& pot, Eigen::VectorXd& x,
                          double grad_tol, int max_iter, double* energy_out,
                          std::vector<double>* energy_trace = nullptr) {
  const int dim = static_cast<int>(x.size());
  Eigen::VectorXd g(dim), step(dim), x_new(dim);
  Eigen::MatrixXd h(dim, dim);
  double f = pot.energy(x);
  double lambda = 1e-8;

  for (int iter = 0; iter < max_iter; ++iter) {
    pot.gradient(x, g);
    if (g.norm() <= grad_tol) {
      *energy_out = f;
      return true;
    }
    pot.hessian(x, h);
    bool moved = false;
    for (int attempt = 0; attempt < 40; ++attempt) {
      Eigen::MatrixXd h_reg = h;
      h_reg.diagonal().array() += lambda;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(h_reg);
      if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
        step = ldlt.solve(-g);
        x_new = x + step;
        const double f_new = pot.energy(x_new);
        if (std::isfinite(f_new) && f_new <= f + 1e-14 * std::abs(f)) {
          x = x_new;
          f = f_new;
          lambda = std::max(lambda * 0.25, 1e-12);
          moved = true;
          if (energy_trace) energy_trace->push_back(f);
          break;
        }
      }
      lambda *= 10.0;
    }
    if (!moved || f < 0.0) {
      *energy_out = f;
      return false;
    }
  }
  pot.gradient(x, g);
  *energy_out = f;
  return g.norm() <= grad_tol;
}

inline Eigen::VectorXd random_seed_positions(const PotentialFunction& pot,
                                             std::mt19937_64& rng) {
  const int n = pot.n_ions();
  // Spheroid estimate: semi-axis per direction from the quadratic stiffness,
  // scaled with N^(1/3) as for a zero-temperature plasma.
  const double nr = std::cbrt(static_cast<double>(std::max(n, 2)));
  const double lx = 1.6 * nr / std::cbrt(std::max(pot.kx(), 1e-3));
  const double ly = 1.6 * nr / std::cbrt(std::max(pot.ky(), 1e-3));
  double lz = 1.6 * nr;
  // a softening quartic makes the axial potential finite-depth; seed well
  // inside the rim at |z| = 1/(2 sqrt(|c4|))
  if (pot.quartic_c4() < 0.0)
    lz = std::min(lz, 0.35 / std::sqrt(-pot.quartic_c4()));
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Eigen::VectorXd x(3 * n);
  for (int j = 0; j < n; ++j) {
    x[3 * j] = lx * uni(rng);
    x[3 * j + 1] = ly * uni(rng);
    x[3 * j + 2] = lz * uni(rng);
  }
  return x;
}

}  // namespace detail

// Deterministic best-of-restarts local minimization. Restart k uses the
// stream (seed, k); ties in energy resolve to the lowest restart index.
inline CrystalEquilibrium solve_equilibrium(const TrapConfig& cfg,
                                            std::uint64_t seed,
                                            int restarts = 4) {
  const PotentialFunction pot = build_effective_potential(cfg);
  const int n = cfg.n_ions;
  const double grad_tol = 1e-10;

  Eigen::VectorXd best;
  double best_energy = std::numeric_limits<double>::infinity();
  bool converged_any = false;
  std::string last_diag;

  for (int k = 0; k < std::max(restarts, 1); ++k) {
    std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(k));
    Eigen::VectorXd x;
    if (n == 1) {
      x = Eigen::VectorXd::Zero(3);
    } else {
      x = detail::random_seed_positions(pot, rng);
    }
    double e = 0.0;
    if (cfg.anharmonic_c4 < 0.0) {
      // homotopy: settle the bounded harmonic crystal first, then switch the
      // softening quartic on from an already-compact configuration
      const PotentialFunction harmonic(n, pot.kx(), pot.ky(), 0.0);
      detail::lbfgs_minimize(harmonic, x, 1e-6, 4000, &e);
    }
    detail::lbfgs_minimize(pot, x, 1e-6, 4000, &e);
    const bool ok = detail::newton_polish(pot, x, grad_tol, 200, &e);
    if (!ok) {
      Eigen::VectorXd g;
      pot.gradient(x, g);
      last_diag = "restart " + std::to_string(k) +
                  ": |grad|=" + std::to_string(g.norm()) +
                  " energy=" + std::to_string(e);
      continue;
    }
    converged_any = true;
    if (e < best_energy - 1e-13 * std::abs(best_energy) ||
        (best.size() == 0)) {
      best_energy = e;
      best = x;
    }
  }
  if (!converged_any)
    throw ConvergenceError("equilibrium solve failed after " +
                           std::to_string(restarts) + " restarts (" +
                           last_diag + ")");

  Eigen::VectorXd g;
  pot.gradient(best, g);

  const double l0 = cfg.length_scale();
  const double e0 = cfg.energy_scale();
  CrystalEquilibrium eq;
  eq.positions = best * l0;
  eq.frame = (cfg.trap_kind == TrapKind::penning) ? Frame::rotating : Frame::lab;
  eq.potential_energy = best_energy * e0;
  eq.gradient_norm = g.norm() * e0 / l0;
  eq.n_ions = n;
  eq.seed = seed;
  return eq;
}

// Dimensionless coordinates of an equilibrium, for mode analysis.
inline Eigen::VectorXd internal_coordinates(const TrapConfig& cfg,
                                            const CrystalEquilibrium& eq) {
  return eq.positions / cfg.length_scale();
}

}  // namespace ionpa
