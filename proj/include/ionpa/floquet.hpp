#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "ionpa/drive.hpp"
#include "ionpa/errors.hpp"
#include "ionpa/modes.hpp"
#include "ionpa/parametric.hpp"

namespace ionpa {

// One Fourier component H_l of the drive-frame Hamiltonian
//   H(t) = sum_l H_l e^{i l mu t},
// stored as matrices over the mode operators plus spin-conditioned pieces:
//   sum_nm number(n,m) a_n^dag a_m
// + sum_nm pair_create(n,m) a_n^dag a_m^dag + pair_annihilate(n,m) a_n a_m
// + sum_n  lin_a(n) a_n + lin_adag(n) a_n^dag
// + sum_nj (sdf_a(n,j) a_n + sdf_adag(n,j) a_n^dag) sigma_j
// + sum_j  spin_term(j) sigma'_j                (motion-free)
// Hermiticity of H(t) corresponds to H_{-l} = H_l^dag.
struct Harmonic {
  Eigen::MatrixXcd number;
  Eigen::MatrixXcd pair_create;
  Eigen::MatrixXcd pair_annihilate;
  Eigen::VectorXcd lin_a, lin_adag;
  Eigen::MatrixXcd sdf_a, sdf_adag;  // modes x ions
  Eigen::VectorXcd spin_term;

  void init(int n_modes, int n_ions) {
    number = Eigen::MatrixXcd::Zero(n_modes, n_modes);
    pair_create = Eigen::MatrixXcd::Zero(n_modes, n_modes);
    pair_annihilate = Eigen::MatrixXcd::Zero(n_modes, n_modes);
    lin_a = Eigen::VectorXcd::Zero(n_modes);
    lin_adag = Eigen::VectorXcd::Zero(n_modes);
    sdf_a = Eigen::MatrixXcd::Zero(n_modes, n_ions);
    sdf_adag = Eigen::MatrixXcd::Zero(n_modes, n_ions);
    spin_term = Eigen::VectorXcd::Zero(n_ions);
  }
};

struct HarmonicDecomposition {
  std::array<Harmonic, 9> h;  // l = -4 .. 4 at index l + 4
  int n_modes = 0;
  int n_ions = 0;
  double mu = 0.0;
  double theta = 0.0;
  SdfKind kind = SdfKind::light_shift;

  Harmonic& at(int l) { return h[l + 4]; }
  const Harmonic& at(int l) const { return h[l + 4]; }
};

// Raw ingredients of the PA harmonic structure, independent of where the
// mode data came from. delta[n] = mu - omega_n; coupling(n,j) is the RWA
// spin-motion coefficient f_n u_nj^z e^{i phi_j}; equilibrium_overlap[n] is
// E_n = sum_j (z0_j u_nj^z - (x0_j u_nj^x + y0_j u_nj^y)/2) in meters.
struct HarmonicInputs {
  Eigen::VectorXd delta;
  Eigen::MatrixXd g;
  Eigen::MatrixXcd A;
  Eigen::MatrixXcd B;
  Eigen::VectorXcd equilibrium_overlap;
  Eigen::VectorXd l;                 // zero-point lengths, m
  Eigen::MatrixXcd coupling;         // modes x ions
  Eigen::MatrixXcd coupling_cr;      // CR variant f_n u_nj^z e^{-i phi_j}
  Eigen::VectorXcd spin_motion_free; // per-ion motion-free amplitude at l=+1
  double omega_p = 0.0;
  double theta = 0.0;
  double mu = 0.0;
  SdfKind kind = SdfKind::ms_phase_sensitive;
};

inline HarmonicDecomposition assemble_harmonics(const HarmonicInputs& in) {
  const int m = static_cast<int>(in.delta.size());
  const int n_ions = static_cast<int>(in.coupling.cols());
  const std::complex<double> i(0.0, 1.0);
  const std::complex<double> em = std::exp(-i * in.theta);
  const std::complex<double> ep = std::exp(i * in.theta);

  HarmonicDecomposition out;
  out.n_modes = m;
  out.n_ions = n_ions;
  out.mu = in.mu;
  out.theta = in.theta;
  out.kind = in.kind;
  for (auto& hl : out.h) hl.init(m, n_ions);

  const Eigen::MatrixXcd gA = in.g.cast<std::complex<double>>().cwiseProduct(in.A);
  const Eigen::MatrixXcd gB = in.g.cast<std::complex<double>>().cwiseProduct(in.B);

  // l = 0: detunings, RWA spin-motion coupling, RWA squeezing terms
  auto& h0 = out.at(0);
  h0.number = (-in.delta).asDiagonal().toDenseMatrix().cast<std::complex<double>>();
  h0.pair_annihilate = 0.5 * em * gA;
  h0.pair_create = 0.5 * ep * gA.conjugate();
  h0.sdf_a = in.coupling;
  h0.sdf_adag = in.coupling.conjugate();

  // l = +/-2: SDF counter-rotating spin-motion + PA cross (B) terms
  out.at(2).sdf_adag = in.coupling_cr.conjugate();
  out.at(-2).sdf_a = in.coupling_cr;
  out.at(2).number = em * gB;
  out.at(-2).number = ep * gB;  // (g o B) is Hermitian

  // l = +/-4: PA double-frequency squeezing terms
  out.at(-4).pair_annihilate = 0.5 * ep * gA;
  out.at(4).pair_create = 0.5 * em * gA.conjugate();

  // l = +/-1, +/-3: equilibrium-position (K-type) linear terms
  Eigen::VectorXcd K = Eigen::VectorXcd::Zero(m);
  for (int n = 0; n < m; ++n)
    K[n] = in.omega_p * in.l[n] * in.equilibrium_overlap[n];
  out.at(1).lin_a = em * K;
  out.at(-1).lin_adag = ep * K.conjugate();
  out.at(-3).lin_a = ep * K;
  out.at(3).lin_adag = em * K.conjugate();

  // l = +/-1 motion-free spin term
  out.at(1).spin_term = in.spin_motion_free;
  out.at(-1).spin_term = in.spin_motion_free.conjugate();

  return out;
}

// Bin all drive terms by harmonic for the light-shift or phase-sensitive MS
// gate. The phase-insensitive MS decomposition is not derived here and is
// rejected.
inline HarmonicDecomposition decompose_harmonics(const SDFSpec& sdf,
                                                 const PADriveSpec& pa,
                                                 const ModeSpectrum& spec,
                                                 const IonDrivePhases& phases,
                                                 const CrystalEquilibrium& eq) {
  if (sdf.kind == SdfKind::ms_phase_insensitive)
    throw ConfigError(
        "phase-insensitive MS counter-rotating decomposition unsupported");
  const int m = spec.n_modes();
  const int n_ions = spec.n_ions;
  const std::complex<double> i(0.0, 1.0);

  HarmonicInputs in;
  in.kind = sdf.kind;
  in.mu = sdf.mu;
  in.theta = pa.theta;
  in.omega_p = pa.omega_p;
  in.l = spec.zero_point;
  in.delta.resize(m);
  for (int n = 0; n < m; ++n) in.delta[n] = sdf.mu - spec.frequencies[n];

  const PADriveSpec pa_for_overlaps = pa;
  const OverlapMatrices ov = compute_overlaps(spec, pa_for_overlaps);
  in.g = ov.g;
  in.A = ov.A;
  in.B = ov.B;

  in.equilibrium_overlap.resize(m);
  for (int n = 0; n < m; ++n) {
    std::complex<double> acc(0.0, 0.0);
    for (int j = 0; j < n_ions; ++j) {
      acc += eq.z(j) * spec.u(n, j, 2) -
             0.5 * (eq.x(j) * spec.u(n, j, 0) + eq.y(j) * spec.u(n, j, 1));
    }
    in.equilibrium_overlap[n] = acc;
  }

  const Eigen::VectorXd f = mode_coupling_strengths(sdf, spec);
  in.coupling.resize(m, n_ions);
  in.coupling_cr.resize(m, n_ions);
  for (int n = 0; n < m; ++n) {
    for (int j = 0; j < n_ions; ++j) {
      const std::complex<double> uz = spec.uz(n, j);
      in.coupling(n, j) = f[n] * uz * std::exp(i * phases.phi[j]);
      in.coupling_cr(n, j) = f[n] * uz * std::exp(-i * phases.phi[j]);
    }
  }

  in.spin_motion_free.resize(n_ions);
  if (sdf.kind == SdfKind::light_shift) {
    // -(F0/dk) sin(mu t + phi_j) sigma_j^z, kept explicitly (sigma^z)
    const double amp = sdf.strength / (constants::hbar * sdf.delta_k);
    for (int j = 0; j < n_ions; ++j)
      in.spin_motion_free[j] = i * 0.5 * amp * std::exp(i * phases.phi[j]);
  } else {
    // Omega_eff cos(mu t) sigma_j^y in the local frames
    in.spin_motion_free.setConstant(0.5 * sdf.strength);
  }

  return assemble_harmonics(in);
}

// Leading high-frequency corrections H_F = H_0 + sum_{l>=1} [H_l, H_{-l}]/(l mu).
struct FloquetCorrections {
  Eigen::MatrixXcd spin_spin_xx;  // NxN, coefficient of sigma_j sigma_k, j != k
  Eigen::MatrixXcd mode_shift;    // coefficient of a_n^dag a_n'
  Eigen::MatrixXcd extra_sdf;     // modes x ions, coefficient of a_m sigma_j
  Eigen::VectorXd G_sq;           // G_n^2 = sum_m g_nm^2 |A_nm|^2
};

inline FloquetCorrections floquet_corrections(const HarmonicDecomposition& hd,
                                              double mu) {
  const int m = hd.n_modes;
  const int n_ions = hd.n_ions;
  FloquetCorrections out;
  const Eigen::MatrixXcd& D = hd.at(2).sdf_adag;  // f_n u_nj^* e^{i phi_j}

  out.spin_spin_xx = Eigen::MatrixXcd::Zero(n_ions, n_ions);
  for (int j = 0; j < n_ions; ++j)
    for (int k = 0; k < n_ions; ++k) {
      if (j == k) continue;
      std::complex<double> acc(0.0, 0.0);
      for (int n = 0; n < m; ++n) acc += D(n, j) * std::conj(D(n, k));
      out.spin_spin_xx(j, k) = -acc / (2.0 * mu);
    }

  // [H_4, H_-4]/(4 mu) with H_4 = W a^dag a^dag, H_-4 = V a a gives
  // -4 (W V) a^dag a / (4 mu); the l = +/-2 PA pieces commute away.
  out.mode_shift =
      -(hd.at(4).pair_create * hd.at(-4).pair_annihilate) / mu;

  // SDF-PA cross term from the l = +/-2 commutators
  out.extra_sdf = -(hd.at(2).number.transpose() * D.conjugate()) / (2.0 * mu);

  out.G_sq.resize(m);
  for (int n = 0; n < m; ++n) {
    double acc = 0.0;
    for (int q = 0; q < m; ++q) acc += std::norm(hd.at(4).pair_create(n, q));
    out.G_sq[n] = 4.0 * acc;
  }
  return out;
}

// Gain e^{-2r} including the counter-rotating frequency shift, with
// G_n^2 = g^2. compensated = true shifts the set detuning so that the mode
// effectively sits at delta with delta' = sqrt(delta^2 - g^2); otherwise the
// naive delta = sqrt(delta'^2 + g^2) is used and the shift degrades the gain:
//   e^{-r} = ((delta + g^2/(4 mu) + g) / (delta + g^2/(4 mu) - g))^(1/4).
inline double gain_with_cr(double delta_eff_target, double g, double mu,
                           bool compensated) {
  if (g == 0.0) return 1.0;
  const double delta_naive = delta_for_target(delta_eff_target, g);
  double delta_eff_actual;
  if (compensated) {
    delta_eff_actual = delta_naive;  // set point lowered by g^2/(4 mu)
  } else {
    delta_eff_actual = delta_naive + g * g / (4.0 * mu);
  }
  if (delta_eff_actual <= g)
    throw ThresholdError("above threshold after CR shift");
  return std::sqrt((delta_eff_actual + g) / (delta_eff_actual - g));
}

namespace detail {

// Time-dependent coefficient matrix of d/dt (a, a^dag) for the quadratic
// part, and the inhomogeneous drive vector with spins frozen to signs s_j.
inline void floquet_system_at(const HarmonicDecomposition& hd, double t,
                              const Eigen::VectorXd& spin_signs,
                              bool include_odd, Eigen::MatrixXcd& C,
                              Eigen::VectorXcd& b) {
  const int m = hd.n_modes;
  const std::complex<double> i(0.0, 1.0);
  Eigen::MatrixXcd N = Eigen::MatrixXcd::Zero(m, m);
  Eigen::MatrixXcd F = Eigen::MatrixXcd::Zero(m, m);
  Eigen::MatrixXcd P = Eigen::MatrixXcd::Zero(m, m);
  Eigen::VectorXcd la = Eigen::VectorXcd::Zero(m);
  Eigen::VectorXcd lad = Eigen::VectorXcd::Zero(m);
  for (int l = -4; l <= 4; ++l) {
    if (!include_odd && (l % 2 != 0)) continue;
    const std::complex<double> ph = std::exp(i * static_cast<double>(l) * hd.mu * t);
    const Harmonic& hl = hd.at(l);
    N += ph * hl.number;
    F += ph * hl.pair_create;
    P += ph * hl.pair_annihilate;
    la += ph * (hl.lin_a + hl.sdf_a * spin_signs.cast<std::complex<double>>());
    lad += ph * (hl.lin_adag + hl.sdf_adag * spin_signs.cast<std::complex<double>>());
  }
  C.resize(2 * m, 2 * m);
  C.topLeftCorner(m, m) = N;
  C.topRightCorner(m, m) = F + F.transpose();
  C.bottomLeftCorner(m, m) = -(P + P.transpose());
  C.bottomRightCorner(m, m) = -N.transpose();
  C *= -i;
  b.resize(2 * m);
  b.head(m) = lad;
  b.tail(m) = -la;
  b *= -i;
}

}  // namespace detail

struct MonodromyResult {
  Eigen::MatrixXcd monodromy;     // one-period fundamental matrix
  Eigen::VectorXcd displacement;  // forced response from the origin
  Eigen::VectorXd frequencies;    // positive mode frequencies, descending
};

// Exact one-period propagation of the spin-frozen quadratic system with a
// fixed-step RK4 integrator. The monodromy eigenvalues e^{-i nu T} give the
// stroboscopic mode frequencies.
inline MonodromyResult symplectic_oracle(const HarmonicDecomposition& hd,
                                         double mu,
                                         const Eigen::VectorXd& spin_signs,
                                         int steps_per_period = 4096,
                                         bool include_odd = true,
                                         double t_start = 0.0) {
  const int m = hd.n_modes;
  const double T = constants::two_pi / mu;
  const double h = T / steps_per_period;

  Eigen::MatrixXcd phi = Eigen::MatrixXcd::Identity(2 * m, 2 * m);
  Eigen::VectorXcd xi = Eigen::VectorXcd::Zero(2 * m);
  Eigen::MatrixXcd C1, C2, C3;
  Eigen::VectorXcd b1, b2, b3;
  Eigen::MatrixXcd k1, k2, k3, k4;
  Eigen::VectorXcd v1, v2, v3, v4;

  for (int s = 0; s < steps_per_period; ++s) {
    const double t = t_start + s * h;
    detail::floquet_system_at(hd, t, spin_signs, include_odd, C1, b1);
    detail::floquet_system_at(hd, t + 0.5 * h, spin_signs, include_odd, C2, b2);
    detail::floquet_system_at(hd, t + h, spin_signs, include_odd, C3, b3);

    k1 = C1 * phi;
    v1 = C1 * xi + b1;
    k2 = C2 * (phi + 0.5 * h * k1);
    v2 = C2 * (xi + 0.5 * h * v1) + b2;
    k3 = C2 * (phi + 0.5 * h * k2);
    v3 = C2 * (xi + 0.5 * h * v2) + b2;
    k4 = C3 * (phi + h * k3);
    v4 = C3 * (xi + h * v3) + b3;

    phi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    xi += (h / 6.0) * (v1 + 2.0 * v2 + 2.0 * v3 + v4);
  }

  MonodromyResult out;
  out.monodromy = phi;
  out.displacement = xi;

  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(phi);
  if (es.info() != Eigen::Success)
    throw ModeInstabilityError("monodromy eigenvalue solve failed");
  std::vector<double> freqs;
  for (int k = 0; k < 2 * m; ++k) {
    const std::complex<double> rho = es.eigenvalues()[k];
    const double nu = -std::arg(rho) / T;
    if (nu > 0.0) freqs.push_back(nu);
  }
  std::sort(freqs.begin(), freqs.end(), std::greater<double>());
  out.frequencies = Eigen::Map<Eigen::VectorXd>(freqs.data(),
                                                static_cast<long>(freqs.size()));
  return out;
}

// Mode frequencies of the time-independent quadratic Hamiltonian
// H_0 (+ the 1/mu mode-shift correction): spectrum of the stability matrix.
inline Eigen::VectorXd floquet_predicted_frequencies(
    const HarmonicDecomposition& hd, double mu, bool with_corrections) {
  const int m = hd.n_modes;
  const std::complex<double> i(0.0, 1.0);
  Eigen::MatrixXcd N = hd.at(0).number;
  if (with_corrections) N += floquet_corrections(hd, mu).mode_shift;
  const Eigen::MatrixXcd& F = hd.at(0).pair_create;
  const Eigen::MatrixXcd& P = hd.at(0).pair_annihilate;
  Eigen::MatrixXcd C(2 * m, 2 * m);
  C.topLeftCorner(m, m) = N;
  C.topRightCorner(m, m) = F + F.transpose();
  C.bottomLeftCorner(m, m) = -(P + P.transpose());
  C.bottomRightCorner(m, m) = -N.transpose();
  C *= -i;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C);
  std::vector<double> freqs;
  for (int k = 0; k < 2 * m; ++k) {
    const std::complex<double> lam = es.eigenvalues()[k];
    const double nu = -lam.imag();
    if (nu > 0.0) freqs.push_back(nu);
  }
  std::sort(freqs.begin(), freqs.end(), std::greater<double>());
  return Eigen::Map<Eigen::VectorXd>(freqs.data(),
                                     static_cast<long>(freqs.size()));
}

// Secular squeezing parameters of a single driven mode, extracted from
// one-period monodromies. The generator of a single monodromy carries
// drive-phase-dependent kick contributions at O(1/mu); averaging the
// generator over the starting phase removes them and leaves the effective
// Hamiltonian -delta_eff a^dag a + (squeeze terms) that governs the
// accumulated gate dynamics.
struct StroboscopicSqueezing {
  double delta_eff = 0.0;
  double g_eff = 0.0;
  double gain = 0.0;  // e^{-2r}
};

inline StroboscopicSqueezing stroboscopic_squeezing(
    const HarmonicDecomposition& hd, double mu, int steps_per_period = 4096,
    int phase_samples = 16) {
  if (hd.n_modes != 1)
    throw ConfigError("stroboscopic squeezing extraction needs a single mode");
  const Eigen::VectorXd no_spins = Eigen::VectorXd::Zero(hd.n_ions);
  const double T = constants::two_pi / mu;

  Eigen::Matrix2cd K = Eigen::Matrix2cd::Zero();
  for (int p = 0; p < phase_samples; ++p) {
    const double t0 = T * p / phase_samples;
    const MonodromyResult mono =
        symplectic_oracle(hd, mu, no_spins, steps_per_period, true, t0);
    Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(mono.monodromy);
    const Eigen::Vector2cd lam = es.eigenvalues();
    Eigen::Matrix2cd logm = Eigen::Matrix2cd::Zero();
    const Eigen::Matrix2cd V = es.eigenvectors();
    logm(0, 0) = std::log(lam[0]);
    logm(1, 1) = std::log(lam[1]);
    K += (V * logm * V.inverse()) / (T * phase_samples);
  }
  // K = -i [[-d, 2F], [-2F*, d]]
  const double delta_eff = (std::complex<double>(0.0, 1.0) * K(0, 0)).real() * -1.0;
  const double g_eff = std::abs(K(0, 1));
  StroboscopicSqueezing out;
  out.delta_eff = delta_eff;
  out.g_eff = g_eff;
  if (delta_eff <= g_eff)
    throw ThresholdError("stroboscopic dynamics above threshold");
  out.gain = std::sqrt((delta_eff + g_eff) / (delta_eff - g_eff));
  return out;
}

}  // namespace ionpa
