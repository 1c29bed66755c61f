#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <complex>
#include <numeric>
#include <string>
#include <vector>

#include "ionpa/errors.hpp"
#include "ionpa/trap.hpp"

namespace ionpa {

enum class ModeBranch { drumhead, planar, mixed };

inline const char* branch_name(ModeBranch b) {
  switch (b) {
    case ModeBranch::drumhead: return "drumhead";
    case ModeBranch::planar: return "planar";
    default: return "mixed";
  }
}

// 3N normal modes of the linearized crystal. Eigenvectors u(n, 3j+a) are
// complex with the constraint sum_{a,j} |u|^2 = 1 per mode, global phase
// fixed so the largest-magnitude component is real positive. zero_point[n]
// (meters) is set so that the displacement expansion
//   alpha_j = sum_n l_n (u_nj^a a_n + u_nj^a* a_n^dag)
// carries the canonical commutation relations; for real eigenvectors it
// equals sqrt(hbar / (2 m omega_n)).
struct ModeSpectrum {
  Eigen::VectorXd frequencies;   // rad/s, sorted descending
  Eigen::MatrixXcd eigenvectors; // (3N modes) x (3N coords)
  Eigen::VectorXd zero_point;    // meters
  std::vector<ModeBranch> branch_labels;
  std::vector<bool> near_zero;   // flagged gauge/rotational modes
  int n_ions = 0;

  int n_modes() const { return static_cast<int>(frequencies.size()); }
  std::complex<double> u(int mode, int ion, int axis) const {
    return eigenvectors(mode, 3 * ion + axis);
  }
  std::complex<double> uz(int mode, int ion) const { return u(mode, ion, 2); }
};

namespace detail {

inline void fix_gauge(Eigen::Ref<Eigen::VectorXcd> v) {
  int imax = 0;
  double amax = 0.0;
  for (int i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]);
    if (a > amax) {
      amax = a;
      imax = i;
    }
  }
  if (amax > 0.0) v *= std::conj(v[imax]) / amax;
}

inline ModeBranch classify_branch(const Eigen::VectorXcd& v, int n_ions) {
  double wz = 0.0;
  for (int j = 0; j < n_ions; ++j) wz += std::norm(v[3 * j + 2]);
  if (wz >= 0.9) return ModeBranch::drumhead;
  if (wz <= 0.1) return ModeBranch::planar;
  return ModeBranch::mixed;
}

struct RawMode {
  double omega;                // internal units of omega_z
  Eigen::VectorXcd w_q;        // position part, internal units
  double zp;                   // internal zero-point length
  bool near_zero;
};

inline void sort_and_store(std::vector<RawMode>& raw, const TrapConfig& cfg,
                           ModeSpectrum& out) {
  std::sort(raw.begin(), raw.end(), [](const RawMode& a, const RawMode& b) {
    return a.omega > b.omega;
  });
  const int m = static_cast<int>(raw.size());
  const double l0 = cfg.length_scale();
  out.frequencies.resize(m);
  out.eigenvectors.resize(m, 3 * cfg.n_ions);
  out.zero_point.resize(m);
  out.branch_labels.resize(m);
  out.near_zero.resize(m);
  out.n_ions = cfg.n_ions;
  for (int n = 0; n < m; ++n) {
    Eigen::VectorXcd v = raw[n].w_q;
    const double norm = v.norm();
    if (norm > 0.0) v /= norm;
    fix_gauge(v);
    out.frequencies[n] = raw[n].omega * cfg.axial_freq;
    out.eigenvectors.row(n) = v.transpose();
    out.zero_point[n] = raw[n].zp * l0;
    out.branch_labels[n] = classify_branch(v, cfg.n_ions);
    out.near_zero[n] = raw[n].near_zero;
  }
}

}  // namespace detail

// Linearize about the equilibrium and solve for the 3N modes. Paul traps use
// the real symmetric Hessian eigenproblem; Penning traps use the first-order
// 6N problem with the velocity coupling omega_B = omega_c - 2 omega_r, and
// the complex eigenvectors are normalized through the symplectic form so the
// quantized expansion has the correct zero-point variance.
inline ModeSpectrum compute_modes(const TrapConfig& cfg,
                                  const CrystalEquilibrium& eq) {
  const PotentialFunction pot = build_effective_potential(cfg);
  const Eigen::VectorXd xi = internal_coordinates(cfg, eq);
  const int dim = 3 * cfg.n_ions;
  Eigen::MatrixXd hess(dim, dim);
  pot.hessian(xi, hess);

  // hbar in internal units m omega_z^2 l0^2 / omega_z
  const double l0 = cfg.length_scale();
  const double hbar_int =
      constants::hbar / (cfg.ion_mass * cfg.axial_freq * l0 * l0);
  const double zero_tol = 1e-6;

  std::vector<detail::RawMode> raw;
  raw.reserve(dim);
  ModeSpectrum spec;

  if (cfg.trap_kind == TrapKind::paul_pseudopotential) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hess);
    for (int i = 0; i < dim; ++i) {
      const double lam = es.eigenvalues()[i];
      if (lam < -1e-10)
        throw ModeInstabilityError("unstable mode " + std::to_string(i) +
                                   ": omega^2 = " + std::to_string(lam) +
                                   " (internal units)");
      const double w = std::sqrt(std::max(lam, 0.0));
      detail::RawMode rm;
      rm.omega = w;
      rm.w_q = es.eigenvectors().col(i).cast<std::complex<double>>();
      rm.near_zero = (w < zero_tol);
      rm.zp = rm.near_zero ? 0.0 : std::sqrt(hbar_int / (2.0 * w));
      raw.push_back(std::move(rm));
    }
    detail::sort_and_store(raw, cfg, spec);
    return spec;
  }

  // Penning: d/dt (dr, dv) = M (dr, dv) with M = [[0, I], [-K, -wB Z]],
  // Z v = zhat x v per ion.
  const double wB = (cfg.cyclotron_freq() - 2.0 * cfg.rotation_freq) / cfg.axial_freq;
  Eigen::MatrixXd zcross = Eigen::MatrixXd::Zero(dim, dim);
  for (int j = 0; j < cfg.n_ions; ++j) {
    zcross(3 * j, 3 * j + 1) = -1.0;
    zcross(3 * j + 1, 3 * j) = 1.0;
  }
  Eigen::MatrixXd big = Eigen::MatrixXd::Zero(2 * dim, 2 * dim);
  big.block(0, dim, dim, dim).setIdentity();
  big.block(dim, 0, dim, dim) = -hess;
  big.block(dim, dim, dim, dim) = -wB * zcross;

  Eigen::EigenSolver<Eigen::MatrixXd> es(big);
  if (es.info() != Eigen::Success)
    throw ModeInstabilityError("eigenvalue iteration failed");

  for (int i = 0; i < 2 * dim; ++i) {
    const std::complex<double> lam = es.eigenvalues()[i];
    const double scale = std::max(std::abs(lam), 1.0);
    if (std::abs(lam.real()) > 1e-7 * scale)
      throw ModeInstabilityError(
          "unstable mode " + std::to_string(i) +
          ": eigenvalue has real part " + std::to_string(lam.real()));
    if (lam.imag() >= 0.0) continue;  // keep the -i omega member of each pair
    const double w = -lam.imag();

    Eigen::VectorXcd w_q = es.eigenvectors().col(i).head(dim);
    Eigen::VectorXcd w_v = es.eigenvectors().col(i).tail(dim);
    // canonical momentum p = v + (wB/2) zhat x r (unit mass)
    Eigen::VectorXcd w_p = w_v + 0.5 * wB * (zcross * w_q);
    // kappa = -2 Im(w_q^dag w_p); the annihilation member has kappa > 0
    const double kappa = -2.0 * (w_q.dot(w_p)).imag();

    detail::RawMode rm;
    rm.near_zero = (w < zero_tol);
    rm.omega = w;
    if (kappa <= 0.0) {
      if (rm.near_zero) {
        rm.w_q = w_q;
        rm.zp = 0.0;
        raw.push_back(std::move(rm));
        continue;
      }
      throw ModeInstabilityError("mode " + std::to_string(i) +
                                 " has non-positive symplectic norm");
    }
    w_q *= std::sqrt(hbar_int / kappa);
    rm.zp = rm.near_zero ? 0.0 : w_q.norm();
    rm.w_q = std::move(w_q);
    raw.push_back(std::move(rm));
  }

  if (static_cast<int>(raw.size()) != dim)
    throw ModeInstabilityError("expected " + std::to_string(dim) +
                               " modes, found " + std::to_string(raw.size()));
  detail::sort_and_store(raw, cfg, spec);
  return spec;
}

// Expansion coefficients of the displacement operator alpha_j over modes:
// per mode n the pair (l_n u_nj^a, l_n u_nj^a*).
struct DisplacementTerm {
  int mode;
  std::complex<double> coeff;       // multiplies a_n
  std::complex<double> coeff_conj;  // multiplies a_n^dag
};

inline std::vector<DisplacementTerm> mode_displacement_operator(
    const ModeSpectrum& spec, int ion, int axis) {
  if (ion < 0 || ion >= spec.n_ions || axis < 0 || axis > 2)
    throw ConfigError("displacement operator index out of bounds");
  std::vector<DisplacementTerm> terms;
  terms.reserve(spec.n_modes());
  for (int n = 0; n < spec.n_modes(); ++n) {
    const std::complex<double> c = spec.zero_point[n] * spec.u(n, ion, axis);
    terms.push_back({n, c, std::conj(c)});
  }
  return terms;
}

}  // namespace ionpa
