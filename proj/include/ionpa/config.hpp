#pragma once

#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ionpa/constants.hpp"
#include "ionpa/drive.hpp"
#include "ionpa/errors.hpp"
#include "ionpa/trap.hpp"

namespace ionpa {

// Flat key/value config with `section.key = value` lines, `#` comments and
// blank lines. Values are free-form strings; typed access below. Frequencies
// are given in Hz and converted to rad/s on ingestion.
class ConfigFile {
 public:
  static ConfigFile parse(std::istream& is) {
    ConfigFile cf;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      const auto eq = trimmed.find('=');
      if (eq == std::string::npos)
        throw ConfigError("line " + std::to_string(lineno) +
                          ": expected `section.key = value`");
      const std::string key = trim(trimmed.substr(0, eq));
      const std::string value = trim(trimmed.substr(eq + 1));
      if (key.empty() || value.empty())
        throw ConfigError("line " + std::to_string(lineno) +
                          ": empty key or value");
      cf.values_[key] = value;
    }
    return cf;
  }

  static ConfigFile load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file: " + path);
    return parse(is);
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing config key: " + key);
    return it->second;
  }

  double get_double(const std::string& key) const {
    const std::string s = get_string(key);
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config key " + key + ": not a number: `" + s + "`");
    }
  }

  double get_double_or(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
  }

  int get_int(const std::string& key) const {
    const double v = get_double(key);
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
      throw ConfigError("config key " + key + ": expected an integer");
    return i;
  }

  // "a, b" or "a b"
  std::pair<double, double> get_pair(const std::string& key) const {
    std::string s = get_string(key);
    for (auto& c : s)
      if (c == ',') c = ' ';
    std::istringstream is(s);
    double a, b;
    if (!(is >> a >> b))
      throw ConfigError("config key " + key + ": expected two numbers");
    return {a, b};
  }

  const std::map<std::string, std::string>& raw() const { return values_; }

 private:
  static std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
  }

  std::map<std::string, std::string> values_;
};

inline TrapConfig trap_from_config(const ConfigFile& cf) {
  TrapConfig t;
  const std::string kind = cf.get_string("trap.trap_kind");
  if (kind == "penning")
    t.trap_kind = TrapKind::penning;
  else if (kind == "paul_pseudopotential")
    t.trap_kind = TrapKind::paul_pseudopotential;
  else
    throw ConfigError("trap.trap_kind must be penning or paul_pseudopotential");

  t.axial_freq = constants::two_pi * cf.get_double("trap.axial_freq");
  t.ion_mass = cf.get_double("trap.ion_mass");
  t.ion_charge = cf.get_double("trap.ion_charge");
  t.n_ions = cf.get_int("trap.n_ions");
  t.anharmonic_c4 = cf.get_double_or("trap.anharmonic_c4", 0.0);
  if (t.trap_kind == TrapKind::penning) {
    t.magnetic_field = cf.get_double("trap.magnetic_field");
    t.rotation_freq = constants::two_pi * cf.get_double("trap.rotation_freq");
    t.wall_strength = cf.get_double_or("trap.wall_strength", 0.0);
  } else {
    const auto [fx, fy] = cf.get_pair("trap.radial_freqs");
    t.radial_freq_x = constants::two_pi * fx;
    t.radial_freq_y = constants::two_pi * fy;
  }
  t.validate();
  return t;
}

inline SDFSpec sdf_from_config(const ConfigFile& cf) {
  SDFSpec s;
  const std::string kind = cf.get_string("sdf.kind");
  if (kind == "light_shift")
    s.kind = SdfKind::light_shift;
  else if (kind == "ms_phase_insensitive")
    s.kind = SdfKind::ms_phase_insensitive;
  else if (kind == "ms_phase_sensitive")
    s.kind = SdfKind::ms_phase_sensitive;
  else
    throw ConfigError("sdf.kind must be one of light_shift, "
                      "ms_phase_insensitive, ms_phase_sensitive");
  // LS strength is a force in newtons; MS strength is Omega_eff in Hz.
  if (s.kind == SdfKind::light_shift)
    s.strength = cf.get_double("sdf.strength");
  else
    s.strength = constants::two_pi * cf.get_double("sdf.strength");
  s.delta_k = cf.get_double("sdf.delta_k");
  s.mu = constants::two_pi * cf.get_double("sdf.mu");
  s.target_mode = cf.has("sdf.target_mode") ? cf.get_int("sdf.target_mode") : 0;
  if (s.delta_k <= 0.0) throw ConfigError("sdf.delta_k must be positive");
  return s;
}

inline PADriveSpec pa_from_config(const ConfigFile& cf) {
  PADriveSpec p;
  p.omega_p = constants::two_pi * cf.get_double_or("pa.omega_p", 0.0);
  p.theta = cf.get_double_or("pa.theta", 0.0);
  return p;
}

}  // namespace ionpa
