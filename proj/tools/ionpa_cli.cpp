// Command-line driver: computes crystal equilibria, normal modes, parametric
// amplification solutions and spin-spin coupling analyses from a single
// key/value config file, and exports plain CSV/JSON artifacts.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ionpa/ionpa.hpp"

namespace fs = std::filesystem;
using namespace ionpa;

namespace {

constexpr int kExitConfig = 1;       // bad config / usage
constexpr int kExitPhysics = 2;      // instability, threshold, layer failure
constexpr int kExitConvergence = 3;  // minimizer did not converge

struct CommonOpts {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 1;
  int restarts = 4;
  int mode_index = -1;
  std::string theta_grid = "0:6.283185307179586:64";
  std::string reference_csv;
  std::string equilibrium_csv;
  bool compensated = false;
};

Eigen::VectorXd parse_grid(const std::string& s) {
  const auto c1 = s.find(':');
  const auto c2 = s.find(':', c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos)
    throw ConfigError("--theta-grid expects start:stop:count");
  const double start = std::stod(s.substr(0, c1));
  const double stop = std::stod(s.substr(c1 + 1, c2 - c1 - 1));
  const int count = std::stoi(s.substr(c2 + 1));
  if (count < 2) throw ConfigError("--theta-grid needs count >= 2");
  Eigen::VectorXd g(count);
  for (int i = 0; i < count; ++i)
    g[i] = start + (stop - start) * i / (count - 1);
  return g;
}

struct Workspace {
  ConfigFile cf;
  std::string config_content;
  TrapConfig trap;
  std::optional<CrystalEquilibrium> eq;
  std::optional<ModeSpectrum> spec;

  const CrystalEquilibrium& equilibrium(const CommonOpts& o) {
    if (!eq) {
      if (!o.equilibrium_csv.empty()) {
        CrystalEquilibrium loaded = io::read_positions_csv(
            io::read_file(o.equilibrium_csv),
            trap.trap_kind == TrapKind::penning ? Frame::rotating : Frame::lab);
        if (loaded.n_ions != trap.n_ions)
          throw ConfigError("equilibrium file ion count does not match config");
        eq = std::move(loaded);
      } else {
        eq = solve_equilibrium(trap, o.seed, o.restarts);
      }
    }
    return *eq;
  }

  const ModeSpectrum& modes(const CommonOpts& o) {
    if (!spec) spec = compute_modes(trap, equilibrium(o));
    return *spec;
  }
};

Workspace open_workspace(const CommonOpts& o) {
  Workspace w{ConfigFile::load(o.config_path), io::read_file(o.config_path),
              TrapConfig{}, std::nullopt, std::nullopt};
  w.trap = trap_from_config(w.cf);
  return w;
}

void emit(const CommonOpts& o, const std::string& name,
          const std::string& content) {
  fs::create_directories(o.out_dir);
  io::write_file(fs::path(o.out_dir) / name, content);
}

void emit_manifest(const CommonOpts& o, const Workspace& w,
                   const std::string& subcommand) {
  emit(o, "manifest.json",
       io::manifest_json(subcommand, o.config_path, w.config_content,
                         o.out_dir, o.seed));
}

int pick_mode(const CommonOpts& o, const Workspace& w) {
  if (o.mode_index >= 0) return o.mode_index;
  return sdf_from_config(w.cf).target_mode;
}

// Drumhead mode with the largest overlap on the uniform z vector.
int most_uniform_drumhead(const ModeSpectrum& spec) {
  int best = -1;
  double best_ov = -1.0;
  for (int n = 0; n < spec.n_modes(); ++n) {
    if (spec.near_zero[n]) continue;
    std::complex<double> s(0.0, 0.0);
    for (int j = 0; j < spec.n_ions; ++j) s += spec.uz(n, j);
    const double ov = std::norm(s) / spec.n_ions;
    if (ov > best_ov) {
      best_ov = ov;
      best = n;
    }
  }
  if (best < 0) throw ConfigError("no usable drumhead mode found");
  return best;
}

int run_equilibrium(const CommonOpts& o) {
  Workspace w = open_workspace(o);
  const CrystalEquilibrium& eq = w.equilibrium(o);
  emit(o, "positions.csv", io::positions_csv(eq));
  emit(o, "equilibrium.json", io::equilibrium_json(eq));
  emit_manifest(o, w, "equilibrium");
  std::cout << "equilibrium: N=" << eq.n_ions << " energy=" << eq.potential_energy
            << " J, |grad|=" << eq.gradient_norm << " N\n";
  return 0;
}

int run_modes(const CommonOpts& o) {
  Workspace w = open_workspace(o);
  const ModeSpectrum& spec = w.modes(o);
  emit(o, "modes.json", io::modes_json(spec));
  emit_manifest(o, w, "modes");
  std::cout << "modes: " << spec.n_modes() << " modes, f_max="
            << spec.frequencies[0] / constants::two_pi << " Hz\n";
  return 0;
}

int run_overlap(const CommonOpts& o) {
  Workspace w = open_workspace(o);
  const PADriveSpec pa = pa_from_config(w.cf);
  const OverlapMatrices ov = compute_overlaps(w.modes(o), pa);
  emit(o, "overlap.csv", io::overlap_csv(ov));
  emit_manifest(o, w, "overlap");
  std::cout << "overlap: " << ov.A.rows() << "x" << ov.A.cols() << " matrix\n";
  return 0;
}

int run_squeeze(const CommonOpts& o) {
  Workspace w = open_workspace(o);
  const SDFSpec sdf = sdf_from_config(w.cf);
  const PADriveSpec pa = pa_from_config(w.cf);
  const ModeSpectrum& spec = w.modes(o);
  const int mode = pick_mode(o, w);
  const IonDrivePhases phases = derive_phases(sdf, w.equilibrium(o));
  const OverlapMatrices ov = compute_overlaps(spec, pa);
  const double delta = sdf.mu - spec.frequencies[mode];
  const AmplificationSolution sol =
      solve_mode_amplification(spec, ov, phases, pa.theta, delta, mode);
  if (sol.mixing_warning)
    std::cerr << "warning: mode " << mode << " off-diagonal |A| mass "
              << sol.offdiag_mass << " exceeds threshold\n";
  emit(o, "amplification.json", io::amplification_json(sol));
  emit_manifest(o, w, "squeeze");
  std::cout << "squeeze: mode " << mode << " gain " << sol.gain_db << " dB\n";
  return 0;
}

int run_couplings(const CommonOpts& o) {
  Workspace w = open_workspace(o);
  const SDFSpec sdf = sdf_from_config(w.cf);
  const PADriveSpec pa = pa_from_config(w.cf);
  const ModeSpectrum& spec = w.modes(o);
  const int mode = pick_mode(o, w);
  const IonDrivePhases phases = derive_phases(sdf, w.equilibrium(o));
  const Eigen::VectorXd f = mode_coupling_strengths(sdf, spec);
  const double delta = sdf.mu - spec.frequencies[mode];
  const CouplingMatrix J =
      coupling_matrix(spec, f, phases, mode, delta, sdf.kind, sdf.mu);
  emit(o, "couplings.csv", io::couplings_csv(J));
  if (pa.omega_p != 0.0) {
    const OverlapMatrices ov = compute_overlaps(spec, pa);
    const AmplificationSolution sol =
        solve_mode_amplification(spec, ov, phases, pa.theta, delta, mode);
    emit(o, "couplings_scaled.csv",
         io::couplings_csv(apply_scaling(J, sol.S)));
  }
  emit_manifest(o, w, "couplings");
  std::cout << "couplings: mode " << mode << " delta/2pi="
            << delta / constants::two_pi << " Hz\n";
  return 0;
}

int run_bilayer(const CommonOpts& o) {
  Workspace w = open_workspace(o);
  SDFSpec sdf = sdf_from_config(w.cf);
  const PADriveSpec pa = pa_from_config(w.cf);
  const CrystalEquilibrium& eq = w.equilibrium(o);
  const ModeSpectrum& spec = w.modes(o);
  const LayerAssignment layers = assign_layers(eq);

  const int mode = (o.mode_index >= 0) ? o.mode_index : most_uniform_drumhead(spec);
  // Lattice phase referenced to the bottom layer so that theta = 0 is the
  // bottom-enhanced working point.
  const IonDrivePhases phases = derive_phases(sdf, eq, layers.z_bottom);
  const OverlapMatrices ov = compute_overlaps(spec, pa);
  const Eigen::VectorXd f = mode_coupling_strengths(sdf, spec);
  const double delta = sdf.mu - spec.frequencies[mode];
  const CouplingMatrix J =
      coupling_matrix(spec, f, phases, mode, delta, sdf.kind, sdf.mu);

  const Eigen::VectorXd grid = parse_grid(o.theta_grid);
  const BilayerSweep sweep =
      bilayer_sweep(J, spec, ov, phases, delta, layers, grid);
  emit(o, "sweep.csv", io::sweep_csv(sweep));

  const BogoliubovSolution sol =
      solve_bogoliubov(delta, ov.g(mode, mode), ov.A(mode, mode), pa.theta);
  const CouplingMatrix scaled =
      apply_scaling(J, scale_factors(sol, phases, spec, mode));
  double lo = 0.0, hi = 0.0;
  for (int j = 0; j < eq.n_ions; ++j)
    for (int k = j + 1; k < eq.n_ions; ++k) {
      lo = std::min({lo, J.J(j, k).real(), scaled.J(j, k).real()});
      hi = std::max({hi, J.J(j, k).real(), scaled.J(j, k).real()});
    }
  const PairHistogram h_on = pair_histogram(scaled.J, layers, 60, lo, hi);
  const PairHistogram h_off = pair_histogram(J.J, layers, 60, lo, hi);
  emit(o, "histogram.csv", io::histogram_csv(h_on, h_off));

  nlohmann::json lj;
  lj["mode"] = mode;
  lj["threshold_z_m"] = layers.threshold_z;
  lj["z_top_m"] = layers.z_top;
  lj["z_bottom_m"] = layers.z_bottom;
  lj["n_top"] = layers.count(Layer::top);
  lj["n_bottom"] = layers.count(Layer::bottom);
  lj["n_scaffold"] = layers.count(Layer::scaffold);
  auto arr = nlohmann::json::array();
  for (const Layer l : layers.layer)
    arr.push_back(l == Layer::top ? "top"
                                  : (l == Layer::bottom ? "bottom" : "scaffold"));
  lj["layer"] = std::move(arr);
  emit(o, "layers.json", lj.dump(2) + "\n");
  emit_manifest(o, w, "bilayer");
  std::cout << "bilayer: mode " << mode << ", layers "
            << layers.count(Layer::top) << "/" << layers.count(Layer::bottom)
            << " (+" << layers.count(Layer::scaffold) << " scaffold)\n";
  return 0;
}

int run_floquet_gain(const CommonOpts& o) {
  Workspace w = open_workspace(o);
  const SDFSpec sdf = sdf_from_config(w.cf);
  std::vector<io::GainPoint> ref;
  if (!o.reference_csv.empty())
    ref = io::read_reference_csv(io::read_file(o.reference_csv));

  // Evaluate over the reference grid when given, else a default sweep.
  std::vector<io::GainPoint> grid;
  if (!ref.empty()) {
    grid = ref;
  } else {
    for (const double tau : {1e-4, 3e-4, 1e-3})
      for (int i = 0; i <= 40; ++i)
        grid.push_back({i * 500.0, tau, 0.0});
  }

  std::vector<io::GainPoint> unc = grid, comp = grid;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double g = constants::two_pi * grid[i].g_over_2pi_hz;
    const double delta_eff = constants::two_pi / grid[i].tau_s;
    unc[i].gain = gain_with_cr(delta_eff, g, sdf.mu, false);
    comp[i].gain = gain_with_cr(delta_eff, g, sdf.mu, true);
  }
  emit(o, "gain.csv", io::gain_csv(unc, comp));

  if (!ref.empty()) {
    double max_rel = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
      const auto& f = o.compensated ? comp[i] : unc[i];
      max_rel = std::max(max_rel, std::abs(f.gain - ref[i].gain) / ref[i].gain);
    }
    nlohmann::json rj;
    rj["reference_csv"] = o.reference_csv;
    rj["compared_curve"] = o.compensated ? "compensated" : "uncompensated";
    rj["n_points"] = ref.size();
    rj["max_relative_residual"] = max_rel;
    emit(o, "overlay_report.json", rj.dump(2) + "\n");
    std::cout << "floquet-gain: max relative residual vs reference " << max_rel
              << "\n";
  } else {
    std::cout << "floquet-gain: wrote " << grid.size() << " grid points\n";
  }
  emit_manifest(o, w, "floquet-gain");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "ionpa: parametric amplification of spin-motion coupling in trapped-ion "
      "crystals.\n"
      "Exit codes: 0 success, 1 config error, 2 physics error (unstable "
      "confinement,\nunstable mode, squeezing threshold, layer failure), 3 "
      "equilibrium non-convergence."};
  app.require_subcommand(1);

  CommonOpts o;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "config file path")->required();
    sub->add_option("--out", o.out_dir, "output directory");
    sub->add_option("--seed", o.seed, "random seed for the equilibrium solve");
    sub->add_option("--restarts", o.restarts, "equilibrium restarts");
    sub->add_option("--mode-index", o.mode_index,
                    "mode index (descending frequency order)");
    sub->add_option("--theta-grid", o.theta_grid,
                    "PA phase grid start:stop:count");
    sub->add_option("--reference-csv", o.reference_csv,
                    "reference marker data (g_over_2pi_Hz,tau_s,gain)");
    sub->add_option("--equilibrium", o.equilibrium_csv,
                    "reuse an exported positions.csv");
    sub->add_flag("--compensated", o.compensated,
                  "compare the compensated curve against the reference");
  };

  std::map<std::string, int (*)(const CommonOpts&)> handlers = {
      {"equilibrium", run_equilibrium}, {"modes", run_modes},
      {"overlap", run_overlap},         {"squeeze", run_squeeze},
      {"couplings", run_couplings},     {"bilayer", run_bilayer},
      {"floquet-gain", run_floquet_gain}};

  const std::map<std::string, std::string> help = {
      {"equilibrium", "solve the crystal equilibrium and export positions"},
      {"modes", "compute the 3N normal modes"},
      {"overlap", "compute the PA mode-overlap matrices"},
      {"squeeze", "solve the single-mode squeezing transformation"},
      {"couplings", "compute single-mode Ising couplings (and PA scaling)"},
      {"bilayer", "layer-resolved coupling sweep over the PA phase"},
      {"floquet-gain", "counter-rotating gain curves and reference overlay"}};

  for (const auto& [name, fn] : handlers)
    add_common(app.add_subcommand(name, help.at(name)));

  CLI11_PARSE(app, argc, argv);

  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    return handlers.at(sub)(o);
  } catch (const UnstableConfinementError& e) {
    std::cerr << "physics error: " << e.what() << "\n";
    return kExitPhysics;
  } catch (const ModeInstabilityError& e) {
    std::cerr << "physics error: " << e.what() << "\n";
    return kExitPhysics;
  } catch (const ThresholdError& e) {
    std::cerr << "physics error: " << e.what() << "\n";
    return kExitPhysics;
  } catch (const LayerError& e) {
    std::cerr << "physics error: " << e.what() << "\n";
    return kExitPhysics;
  } catch (const ConvergenceError& e) {
    std::cerr << "convergence error: " << e.what() << "\n";
    return kExitConvergence;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}
