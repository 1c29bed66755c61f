#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <sstream>
#include <vector>

#include "ionpa/drive.hpp"
#include "ionpa/errors.hpp"
#include "ionpa/modes.hpp"
#include "ionpa/parametric.hpp"

namespace ionpa {

// Single-mode effective Ising couplings at the decoupling time,
//   J_jk = f_n^2 Re{(u_nj^z e^{i phi_j}) (u_nk^z e^{i phi_k})^*} / delta_n.
// The imaginary parts of the coherence products cancel in the pair sum, so
// only the real part is kept; the matrix goes complex once parametric
// scaling is applied. Diagonal excluded.
struct CouplingMatrix {
  Eigen::MatrixXcd J;  // rad/s
  int mode = 0;
  bool scaled = false;
  double mu = 0.0;
  double delta = 0.0;  // bare delta_n (delta'_n once scaled)
  SdfKind kind = SdfKind::light_shift;
};

inline CouplingMatrix coupling_matrix(const ModeSpectrum& spec,
                                      const Eigen::VectorXd& f,
                                      const IonDrivePhases& phases, int mode,
                                      double delta, SdfKind kind,
                                      double mu = 0.0) {
  if (delta == 0.0) throw ConfigError("zero detuning in coupling_matrix");
  if (mode < 0 || mode >= spec.n_modes())
    throw ConfigError("mode index out of range");
  const int n = spec.n_ions;
  const std::complex<double> i(0.0, 1.0);
  Eigen::VectorXcd c(n);
  for (int j = 0; j < n; ++j)
    c[j] = f[mode] * spec.uz(mode, j) * std::exp(i * phases.phi[j]);
  CouplingMatrix out;
  out.J.resize(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      out.J(j, k) = (j == k) ? 0.0 : (c[j] * std::conj(c[k])).real() / delta;
  out.mode = mode;
  out.delta = delta;
  out.kind = kind;
  out.mu = mu;
  return out;
}

// Parametric scaling J_jk -> S_nj S_nk J_jk; Re is taken at reporting.
inline CouplingMatrix apply_scaling(const CouplingMatrix& J,
                                    const Eigen::VectorXcd& S) {
  if (S.size() != J.J.rows())
    throw ConfigError("scale factor length does not match coupling matrix");
  CouplingMatrix out = J;
  for (int j = 0; j < J.J.rows(); ++j)
    for (int k = 0; k < J.J.cols(); ++k) out.J(j, k) = S[j] * S[k] * J.J(j, k);
  out.scaled = true;
  return out;
}

enum class Layer { top, bottom, scaffold };

struct LayerAssignment {
  std::vector<Layer> layer;
  double threshold_z = 0.0;  // split plane, meters
  double z_top = 0.0;        // layer medians
  double z_bottom = 0.0;

  int count(Layer which) const {
    return static_cast<int>(std::count(layer.begin(), layer.end(), which));
  }
};

namespace detail {

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

// Two-means split on z with scaffold rejection: ions whose |z - layer median|
// exceeds 3x the layer median absolute deviation (with a small absolute
// floor) are tagged scaffold. Fails if the split is not bimodal, i.e. the
// layer separation does not dominate the intra-layer spread.
inline LayerAssignment assign_layers(const CrystalEquilibrium& eq,
                                     double scaffold_mad_factor = 3.0) {
  const int n = eq.n_ions;
  if (n < 4) throw LayerError("too few ions for a layer assignment");
  std::vector<double> zs(n);
  for (int j = 0; j < n; ++j) zs[j] = eq.z(j);

  const double zmin = *std::min_element(zs.begin(), zs.end());
  const double zmax = *std::max_element(zs.begin(), zs.end());
  double c_lo = zmin, c_hi = zmax;
  std::vector<int> member(n, 0);
  for (int it = 0; it < 200; ++it) {
    bool changed = false;
    for (int j = 0; j < n; ++j) {
      const int m = (std::abs(zs[j] - c_hi) < std::abs(zs[j] - c_lo)) ? 1 : 0;
      if (m != member[j]) {
        member[j] = m;
        changed = true;
      }
    }
    double s0 = 0.0, s1 = 0.0;
    int n0 = 0, n1 = 0;
    for (int j = 0; j < n; ++j) {
      if (member[j]) {
        s1 += zs[j];
        ++n1;
      } else {
        s0 += zs[j];
        ++n0;
      }
    }
    if (n0 == 0 || n1 == 0) break;
    c_lo = s0 / n0;
    c_hi = s1 / n1;
    if (!changed) break;
  }

  std::vector<double> z_lo, z_hi;
  for (int j = 0; j < n; ++j) (member[j] ? z_hi : z_lo).push_back(zs[j]);
  if (z_lo.size() < 2 || z_hi.size() < 2) {
    std::ostringstream os;
    os << "z distribution not bimodal: cluster sizes " << z_lo.size() << "/"
       << z_hi.size();
    throw LayerError(os.str());
  }
  const double med_lo = detail::median_of(z_lo);
  const double med_hi = detail::median_of(z_hi);

  auto mad = [](const std::vector<double>& v, double med) {
    std::vector<double> dev(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) dev[i] = std::abs(v[i] - med);
    return detail::median_of(dev);
  };
  const double mad_lo = mad(z_lo, med_lo);
  const double mad_hi = mad(z_hi, med_hi);
  const double gap = med_hi - med_lo;
  // empty band between the clusters, ignoring far outliers (scaffold)
  double band_lo = -1e300, band_hi = 1e300;
  for (const double z : z_lo)
    if (std::abs(z - med_lo) < 0.45 * gap) band_lo = std::max(band_lo, z);
  for (const double z : z_hi)
    if (std::abs(z - med_hi) < 0.45 * gap) band_hi = std::min(band_hi, z);
  const double band = band_hi - band_lo;
  if (!(gap > 0.0) || band < std::max(2.0 * (mad_lo + mad_hi), 0.15 * gap)) {
    std::ostringstream os;
    os << "z distribution not bimodal: median gap " << gap
       << " m, empty band " << band << " m, intra-layer MADs " << mad_lo
       << " / " << mad_hi << " m";
    throw LayerError(os.str());
  }

  LayerAssignment out;
  out.layer.resize(n);
  out.threshold_z = 0.5 * (med_lo + med_hi);
  out.z_top = med_hi;
  out.z_bottom = med_lo;
  const double floor_lo = std::max(scaffold_mad_factor * mad_lo, 1e-4 * gap);
  const double floor_hi = std::max(scaffold_mad_factor * mad_hi, 1e-4 * gap);
  for (int j = 0; j < n; ++j) {
    if (member[j]) {
      out.layer[j] =
          (std::abs(zs[j] - med_hi) > floor_hi) ? Layer::scaffold : Layer::top;
    } else {
      out.layer[j] = (std::abs(zs[j] - med_lo) > floor_lo) ? Layer::scaffold
                                                           : Layer::bottom;
    }
  }
  if (out.count(Layer::top) < 2 || out.count(Layer::bottom) < 2)
    throw LayerError("degenerate layer assignment after scaffold rejection");
  return out;
}

// Mean Re J over ion pairs grouped by layer membership, swept over the PA
// drive phase theta. Scaffold ions are excluded throughout.
struct BilayerSweep {
  Eigen::VectorXd theta;
  Eigen::VectorXd mean_top;     // intra-top pairs
  Eigen::VectorXd mean_bottom;  // intra-bottom pairs
  Eigen::VectorXd mean_inter;   // cross-layer pairs
};

namespace detail {

struct PairMeans {
  double top = 0.0, bottom = 0.0, inter = 0.0;
};

inline PairMeans layer_pair_means(const Eigen::MatrixXcd& J,
                                  const LayerAssignment& layers) {
  PairMeans acc;
  long n_top = 0, n_bot = 0, n_inter = 0;
  const int n = static_cast<int>(J.rows());
  for (int j = 0; j < n; ++j) {
    if (layers.layer[j] == Layer::scaffold) continue;
    for (int k = j + 1; k < n; ++k) {
      if (layers.layer[k] == Layer::scaffold) continue;
      const double v = J(j, k).real();
      if (layers.layer[j] == Layer::top && layers.layer[k] == Layer::top) {
        acc.top += v;
        ++n_top;
      } else if (layers.layer[j] == Layer::bottom &&
                 layers.layer[k] == Layer::bottom) {
        acc.bottom += v;
        ++n_bot;
      } else {
        acc.inter += v;
        ++n_inter;
      }
    }
  }
  if (n_top == 0 || n_bot == 0 || n_inter == 0)
    throw LayerError("layer assignment leaves an empty pair class");
  acc.top /= n_top;
  acc.bottom /= n_bot;
  acc.inter /= n_inter;
  return acc;
}

}  // namespace detail

// r is theta-independent; only the squeezed quadrature follows theta, so the
// sweep re-solves the transformation at every grid point.
inline BilayerSweep bilayer_sweep(const CouplingMatrix& J,
                                  const ModeSpectrum& spec,
                                  const OverlapMatrices& ov,
                                  const IonDrivePhases& phases, double delta,
                                  const LayerAssignment& layers,
                                  const Eigen::VectorXd& theta_grid) {
  BilayerSweep out;
  out.theta = theta_grid;
  const auto n_theta = theta_grid.size();
  out.mean_top.resize(n_theta);
  out.mean_bottom.resize(n_theta);
  out.mean_inter.resize(n_theta);
  for (Eigen::Index t = 0; t < n_theta; ++t) {
    const BogoliubovSolution sol = solve_bogoliubov(
        delta, ov.g(J.mode, J.mode), ov.A(J.mode, J.mode), theta_grid[t]);
    const Eigen::VectorXcd S = scale_factors(sol, phases, spec, J.mode);
    const CouplingMatrix scaled = apply_scaling(J, S);
    const auto means = detail::layer_pair_means(scaled.J, layers);
    out.mean_top[t] = means.top;
    out.mean_bottom[t] = means.bottom;
    out.mean_inter[t] = means.inter;
  }
  return out;
}

// Histogram of Re J over pairs, split intra/inter, for the Fig-style export.
struct PairHistogram {
  Eigen::VectorXd edges;  // size bins+1
  Eigen::VectorXi intra_counts;
  Eigen::VectorXi inter_counts;
};

inline PairHistogram pair_histogram(const Eigen::MatrixXcd& J,
                                    const LayerAssignment& layers, int bins,
                                    double lo, double hi) {
  PairHistogram h;
  h.edges.resize(bins + 1);
  for (int b = 0; b <= bins; ++b)
    h.edges[b] = lo + (hi - lo) * static_cast<double>(b) / bins;
  h.intra_counts = Eigen::VectorXi::Zero(bins);
  h.inter_counts = Eigen::VectorXi::Zero(bins);
  const int n = static_cast<int>(J.rows());
  for (int j = 0; j < n; ++j) {
    if (layers.layer[j] == Layer::scaffold) continue;
    for (int k = j + 1; k < n; ++k) {
      if (layers.layer[k] == Layer::scaffold) continue;
      const double v = J(j, k).real();
      int b = static_cast<int>((v - lo) / (hi - lo) * bins);
      b = std::clamp(b, 0, bins - 1);
      if (layers.layer[j] == layers.layer[k])
        ++h.intra_counts[b];
      else
        ++h.inter_counts[b];
    }
  }
  return h;
}

}  // namespace ionpa
