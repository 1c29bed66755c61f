#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ionpa/couplings.hpp"
#include "ionpa/errors.hpp"
#include "ionpa/modes.hpp"
#include "ionpa/parametric.hpp"
#include "ionpa/trap.hpp"

namespace ionpa::io {

inline constexpr const char* tool_version = "0.1.0";

inline std::string format_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Atomic file write: temp file in the target directory, then rename.
inline void write_file(const std::filesystem::path& path,
                       const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("cannot write " + tmp.string());
    os << content;
  }
  fs::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot read " + path.string());
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

inline std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hash_hex(const std::string& data) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(data)));
  return buf;
}

// ---- equilibrium -----------------------------------------------------------

inline std::string positions_csv(const CrystalEquilibrium& eq) {
  std::ostringstream os;
  os << "ion,x,y,z\n";
  for (int j = 0; j < eq.n_ions; ++j) {
    os << j << ',' << format_full(eq.x(j)) << ',' << format_full(eq.y(j))
       << ',' << format_full(eq.z(j)) << '\n';
  }
  return os.str();
}

inline CrystalEquilibrium read_positions_csv(const std::string& content,
                                             Frame frame = Frame::lab) {
  std::istringstream is(content);
  std::string line;
  if (!std::getline(is, line) || line.rfind("ion,x,y,z", 0) != 0)
    throw ConfigError("positions csv: bad header");
  std::vector<double> coords;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 4) throw ConfigError("positions csv: bad row");
    coords.push_back(std::stod(cells[1]));
    coords.push_back(std::stod(cells[2]));
    coords.push_back(std::stod(cells[3]));
  }
  CrystalEquilibrium eq;
  eq.n_ions = static_cast<int>(coords.size() / 3);
  eq.positions = Eigen::Map<Eigen::VectorXd>(coords.data(),
                                             static_cast<long>(coords.size()));
  eq.frame = frame;
  return eq;
}

inline std::string equilibrium_json(const CrystalEquilibrium& eq) {
  nlohmann::json j;
  j["frame"] = (eq.frame == Frame::rotating) ? "rotating" : "lab";
  j["energy"] = eq.potential_energy;
  j["gradient_norm"] = eq.gradient_norm;
  j["seed"] = eq.seed;
  return j.dump(2) + "\n";
}

// ---- modes -----------------------------------------------------------------

inline std::string modes_json(const ModeSpectrum& spec) {
  nlohmann::json j;
  j["n_ions"] = spec.n_ions;
  auto freqs = nlohmann::json::array();
  auto lengths = nlohmann::json::array();
  auto branches = nlohmann::json::array();
  auto vectors = nlohmann::json::array();
  auto flags = nlohmann::json::array();
  for (int n = 0; n < spec.n_modes(); ++n) {
    freqs.push_back(spec.frequencies[n] / constants::two_pi);
    lengths.push_back(spec.zero_point[n]);
    branches.push_back(branch_name(spec.branch_labels[n]));
    flags.push_back(static_cast<bool>(spec.near_zero[n]));
    auto vec = nlohmann::json::array();
    for (int c = 0; c < 3 * spec.n_ions; ++c) {
      vec.push_back(spec.eigenvectors(n, c).real());
      vec.push_back(spec.eigenvectors(n, c).imag());
    }
    vectors.push_back(std::move(vec));
  }
  j["frequencies_Hz"] = std::move(freqs);
  j["zero_point_m"] = std::move(lengths);
  j["branch_labels"] = std::move(branches);
  j["near_zero"] = std::move(flags);
  j["eigenvectors_re_im"] = std::move(vectors);
  return j.dump() + "\n";
}

// ---- overlaps --------------------------------------------------------------

inline std::string overlap_csv(const OverlapMatrices& ov) {
  std::ostringstream os;
  os << "n,m,re_A,im_A,abs_A\n";
  for (int n = 0; n < ov.A.rows(); ++n)
    for (int m = 0; m < ov.A.cols(); ++m)
      os << n << ',' << m << ',' << format_full(ov.A(n, m).real()) << ','
         << format_full(ov.A(n, m).imag()) << ','
         << format_full(std::abs(ov.A(n, m))) << '\n';
  return os.str();
}

// ---- amplification ---------------------------------------------------------

inline std::string amplification_json(const AmplificationSolution& s) {
  nlohmann::json j;
  j["mode"] = s.mode;
  j["r"] = s.r;
  j["phi"] = s.phi;
  j["delta_Hz"] = s.delta / constants::two_pi;
  j["delta_eff_Hz"] = s.delta_eff / constants::two_pi;
  j["gain_db"] = s.gain_db;
  j["offdiag_mass"] = s.offdiag_mass;
  j["mixing_warning"] = s.mixing_warning;
  auto S = nlohmann::json::array(), v = nlohmann::json::array();
  for (int i = 0; i < s.S.size(); ++i) {
    S.push_back(s.S[i].real());
    S.push_back(s.S[i].imag());
    v.push_back(s.v[i].real());
    v.push_back(s.v[i].imag());
  }
  j["S_re_im"] = std::move(S);
  j["v_re_im"] = std::move(v);
  return j.dump(2) + "\n";
}

// ---- couplings -------------------------------------------------------------

inline std::string couplings_csv(const CouplingMatrix& cm) {
  std::ostringstream os;
  os << "j,k,re_J,im_J\n";
  for (int j = 0; j < cm.J.rows(); ++j)
    for (int k = 0; k < cm.J.cols(); ++k) {
      if (j == k) continue;
      os << j << ',' << k << ',' << format_full(cm.J(j, k).real()) << ','
         << format_full(cm.J(j, k).imag()) << '\n';
    }
  return os.str();
}

inline std::string sweep_csv(const BilayerSweep& sw) {
  std::ostringstream os;
  os << "theta,mean_top,mean_bottom,mean_inter\n";
  for (Eigen::Index t = 0; t < sw.theta.size(); ++t)
    os << format_full(sw.theta[t]) << ',' << format_full(sw.mean_top[t]) << ','
       << format_full(sw.mean_bottom[t]) << ','
       << format_full(sw.mean_inter[t]) << '\n';
  return os.str();
}

inline std::string histogram_csv(const PairHistogram& on,
                                 const PairHistogram& off) {
  std::ostringstream os;
  os << "bin_lo,bin_hi,series,count\n";
  const auto emit = [&](const PairHistogram& h, const char* tag_intra,
                        const char* tag_inter) {
    for (int b = 0; b < h.intra_counts.size(); ++b) {
      os << format_full(h.edges[b]) << ',' << format_full(h.edges[b + 1])
         << ',' << tag_intra << ',' << h.intra_counts[b] << '\n';
      os << format_full(h.edges[b]) << ',' << format_full(h.edges[b + 1])
         << ',' << tag_inter << ',' << h.inter_counts[b] << '\n';
    }
  };
  emit(off, "intra_pa_off", "inter_pa_off");
  emit(on, "intra_pa_on", "inter_pa_on");
  return os.str();
}

// ---- floquet gain ----------------------------------------------------------

struct GainPoint {
  double g_over_2pi_hz = 0.0;
  double tau_s = 0.0;
  double gain = 0.0;
};

inline std::string gain_csv(const std::vector<GainPoint>& unc,
                            const std::vector<GainPoint>& comp) {
  if (unc.size() != comp.size())
    throw ConfigError("gain table size mismatch");
  std::ostringstream os;
  os << "g_over_2pi_Hz,tau_s,gain_uncompensated,gain_compensated\n";
  for (std::size_t i = 0; i < unc.size(); ++i)
    os << format_full(unc[i].g_over_2pi_hz) << ',' << format_full(unc[i].tau_s)
       << ',' << format_full(unc[i].gain) << ',' << format_full(comp[i].gain)
       << '\n';
  return os.str();
}

// Reference marker data: g_over_2pi_Hz,tau_s,gain rows.
inline std::vector<GainPoint> read_reference_csv(const std::string& content) {
  std::istringstream is(content);
  std::string line;
  if (!std::getline(is, line) || line.rfind("g_over_2pi_Hz,tau_s,gain", 0) != 0)
    throw ConfigError("reference csv: expected header g_over_2pi_Hz,tau_s,gain");
  std::vector<GainPoint> pts;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() < 3) throw ConfigError("reference csv: bad row");
    pts.push_back({std::stod(cells[0]), std::stod(cells[1]), std::stod(cells[2])});
  }
  return pts;
}

// ---- manifest --------------------------------------------------------------

inline std::string manifest_json(const std::string& subcommand,
                                 const std::string& config_path,
                                 const std::string& config_content,
                                 const std::string& out_dir,
                                 std::uint64_t seed) {
  nlohmann::json j;
  j["subcommand"] = subcommand;
  j["config_path"] = config_path;
  j["config_hash_fnv1a64"] = hash_hex(config_content);
  j["output_directory"] = out_dir;
  j["seed"] = seed;
  j["tool_version"] = tool_version;
  return j.dump(2) + "\n";
}

}  // namespace ionpa::io
