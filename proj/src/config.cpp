#include "ddsim/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "ddsim/errors.hpp"

namespace ddsim {

double default_fast_noise_sigma() { return 7.10e3; }   // rad/s
double default_fast_noise_tau_c() { return 7.3e-3; }   // s

namespace {

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': bad number '" + v + "'");
  }
}

long parse_long(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    const long x = std::stol(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': bad integer '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
  if (v == "off" || v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key '" + key + "': bad boolean '" + v + "'");
}

std::vector<std::string> split_ws(const std::string& v) {
  std::istringstream is(v);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"experiment", [](RunConfig& c, const std::string&, const std::string& v) { c.experiment = v; }},
      {"sequence_family", [](RunConfig& c, const std::string&, const std::string& v) { c.sequence_family = v; }},
      {"pulse_count", [](RunConfig& c, const std::string& k, const std::string& v) { c.pulse_count = static_cast<int>(parse_long(k, v)); }},
      {"pulse_count_list",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.pulse_count_list.clear();
         for (const auto& t : split_ws(v)) c.pulse_count_list.push_back(static_cast<int>(parse_long(k, t)));
       }},
      {"total_time_s", [](RunConfig& c, const std::string& k, const std::string& v) { c.total_time_s = parse_double(k, v); }},
      {"total_time_list_s",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.total_time_list_s.clear();
         for (const auto& t : split_ws(v)) c.total_time_list_s.push_back(parse_double(k, t));
       }},
      {"rabi_frequency_hz", [](RunConfig& c, const std::string& k, const std::string& v) { c.rabi_frequency_hz = parse_double(k, v); }},
      {"pi_pulse_duration_s", [](RunConfig& c, const std::string& k, const std::string& v) { c.pi_pulse_duration_s = parse_double(k, v); }},
      {"instantaneous_pulses", [](RunConfig& c, const std::string& k, const std::string& v) { c.instantaneous_pulses = parse_bool(k, v); }},
      {"gate_time_s", [](RunConfig& c, const std::string& k, const std::string& v) { c.gate_time_s = parse_double(k, v); }},
      {"j_coupling_hz", [](RunConfig& c, const std::string& k, const std::string& v) { c.j_coupling_hz = parse_double(k, v); }},
      {"dd_targets", [](RunConfig& c, const std::string&, const std::string& v) { c.dd_targets = v; }},
      {"control_state", [](RunConfig& c, const std::string& k, const std::string& v) { c.control_state = static_cast<int>(parse_long(k, v)); }},
      {"target_state", [](RunConfig& c, const std::string& k, const std::string& v) { c.target_state = static_cast<int>(parse_long(k, v)); }},
      {"phase_points", [](RunConfig& c, const std::string& k, const std::string& v) { c.phase_points = static_cast<int>(parse_long(k, v)); }},
      {"shots", [](RunConfig& c, const std::string& k, const std::string& v) { c.shots = static_cast<int>(parse_long(k, v)); }},
      {"readout", [](RunConfig& c, const std::string&, const std::string& v) { c.readout = v; }},
      {"runs", [](RunConfig& c, const std::string& k, const std::string& v) { c.runs = static_cast<int>(parse_long(k, v)); }},
      {"seed", [](RunConfig& c, const std::string& k, const std::string& v) { c.seed = static_cast<uint64_t>(parse_long(k, v)); }},
      {"threads", [](RunConfig& c, const std::string& k, const std::string& v) { c.threads = static_cast<int>(parse_long(k, v)); }},
      {"drift_sigma_hz", [](RunConfig& c, const std::string& k, const std::string& v) { c.drift_sigma_hz = parse_double(k, v); }},
      {"drift_correlation", [](RunConfig& c, const std::string& k, const std::string& v) { c.drift_correlation = parse_double(k, v); }},
      {"drift_mode", [](RunConfig& c, const std::string&, const std::string& v) { c.drift_mode = v; }},
      {"fast_noise", [](RunConfig& c, const std::string& k, const std::string& v) { c.fast_noise = parse_bool(k, v); }},
      {"fast_noise_sigma_rad_s", [](RunConfig& c, const std::string& k, const std::string& v) { c.fast_noise_sigma_rad_s = parse_double(k, v); }},
      {"fast_noise_tau_c_s", [](RunConfig& c, const std::string& k, const std::string& v) { c.fast_noise_tau_c_s = parse_double(k, v); }},
      {"fast_noise_correlated", [](RunConfig& c, const std::string& k, const std::string& v) { c.fast_noise_correlated = parse_bool(k, v); }},
      {"fast_noise_auto_calibrate", [](RunConfig& c, const std::string& k, const std::string& v) { c.fast_noise_auto_calibrate = parse_bool(k, v); }},
      {"fast_noise_target_t2_s", [](RunConfig& c, const std::string& k, const std::string& v) { c.fast_noise_target_t2_s = parse_double(k, v); }},
      {"noise_dt_s", [](RunConfig& c, const std::string& k, const std::string& v) { c.noise_dt_s = parse_double(k, v); }},
      {"field_amplitude_rad_s", [](RunConfig& c, const std::string& k, const std::string& v) { c.field_amplitude_rad_s = parse_double(k, v); }},
      {"field_frequency_hz", [](RunConfig& c, const std::string& k, const std::string& v) { c.field_frequency_hz = parse_double(k, v); }},
      {"field_phase_rad", [](RunConfig& c, const std::string& k, const std::string& v) { c.field_phase_rad = parse_double(k, v); }},
      {"field_sync_to_sequence", [](RunConfig& c, const std::string& k, const std::string& v) { c.field_sync_to_sequence = parse_bool(k, v); }},
      {"field_target_extra_phase_rad", [](RunConfig& c, const std::string& k, const std::string& v) { c.field_target_extra_phase_rad = parse_double(k, v); }},
      {"traces", [](RunConfig& c, const std::string& k, const std::string& v) { c.traces = static_cast<int>(parse_long(k, v)); }},
      {"out_dir", [](RunConfig& c, const std::string&, const std::string& v) { c.out_dir = v; }},
      {"dump_noise_trace", [](RunConfig& c, const std::string& k, const std::string& v) { c.dump_noise_trace = parse_bool(k, v); }},
      {"dump_sequence", [](RunConfig& c, const std::string& k, const std::string& v) { c.dump_sequence = parse_bool(k, v); }},
  };
  return table;
}

const std::vector<std::string> known_experiments = {
    "ramsey",        "fringe_shift_scan", "conditional_ensemble",
    "cnot",          "robustness",        "pdd_lockin",
    "spectrum_probe", "dephasing_scan",   "drift_sample"};

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const size_t hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end())
      throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" +
                        key + "'");
    it->second(cfg, key, value);
  }
  normalize_config(cfg);
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return parse_config(os.str());
}

void normalize_config(RunConfig& cfg) {
  bool known = false;
  for (const auto& e : known_experiments) known = known || e == cfg.experiment;
  if (!known) throw ConfigError("experiment: unknown kind '" + cfg.experiment + "'");

  family_from_string(cfg.sequence_family);  // throws on bad value
  if (cfg.dd_targets != "both" && cfg.dd_targets != "target_only")
    throw ConfigError("dd_targets: expected both|target_only");
  if (cfg.readout != "sampled" && cfg.readout != "exact")
    throw ConfigError("readout: expected sampled|exact");
  if (cfg.drift_mode != "off" && cfg.drift_mode != "per_run" &&
      cfg.drift_mode != "per_shot")
    throw ConfigError("drift_mode: expected off|per_run|per_shot");

  if (cfg.rabi_frequency_hz <= 0) throw ConfigError("rabi_frequency_hz: must be > 0");
  if (cfg.pi_pulse_duration_s < 0)
    cfg.pi_pulse_duration_s = 0.5 / cfg.rabi_frequency_hz;  // pi / (2 pi f)

  // J and the gate time are tied by J * T_gate = pi.
  if (cfg.j_coupling_hz >= 0 && cfg.gate_time_s > 0) {
    const double product = two_pi * cfg.j_coupling_hz * cfg.gate_time_s;
    if (std::abs(product - pi) > 1e-9 * pi)
      throw ConfigError(
          "j_coupling_hz/gate_time_s: inconsistent pair (J * T_gate != pi)");
  } else if (cfg.j_coupling_hz >= 0) {
    cfg.gate_time_s = 0.5 / cfg.j_coupling_hz;
  } else if (cfg.gate_time_s > 0) {
    cfg.j_coupling_hz = 0.5 / cfg.gate_time_s;
  } else {
    throw ConfigError("gate_time_s: need gate_time_s > 0 or j_coupling_hz >= 0");
  }

  if (cfg.fast_noise_sigma_rad_s < 0) cfg.fast_noise_sigma_rad_s = default_fast_noise_sigma();
  if (cfg.fast_noise_tau_c_s < 0) cfg.fast_noise_tau_c_s = default_fast_noise_tau_c();
  if (cfg.noise_dt_s <= 0) throw ConfigError("noise_dt_s: must be > 0");
  if (cfg.fast_noise && cfg.noise_dt_s >= cfg.fast_noise_tau_c_s)
    throw ConfigError("noise_dt_s: must resolve the fast-noise correlation time");
  if (cfg.drift_correlation < -1 || cfg.drift_correlation > 1)
    throw ConfigError("drift_correlation: must lie in [-1, 1]");
  if (cfg.phase_points < 8) throw ConfigError("phase_points: need >= 8 for fitting");
  if (cfg.shots < 1) throw ConfigError("shots: must be >= 1");
  if (cfg.runs < 1) throw ConfigError("runs: must be >= 1");
  if (cfg.traces < 2) throw ConfigError("traces: must be >= 2");
  if (cfg.control_state < 0 || cfg.control_state > 1)
    throw ConfigError("control_state: must be 0 or 1");
  if (cfg.target_state < 0 || cfg.target_state > 1)
    throw ConfigError("target_state: must be 0 or 1");
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream os;
  auto kv = [&os](const char* k, const std::string& v) { os << k << " = " << v << "\n"; };
  auto kvd = [&](const char* k, double v) { kv(k, fmt_g(v)); };
  auto kvi = [&](const char* k, long v) { kv(k, std::to_string(v)); };
  auto kvb = [&](const char* k, bool v) { kv(k, v ? "on" : "off"); };

  kv("experiment", c.experiment);
  kv("sequence_family", c.sequence_family);
  kvi("pulse_count", c.pulse_count);
  if (!c.pulse_count_list.empty()) {
    std::string s;
    for (int n : c.pulse_count_list) s += (s.empty() ? "" : " ") + std::to_string(n);
    kv("pulse_count_list", s);
  }
  kvd("total_time_s", c.total_time_s);
  if (!c.total_time_list_s.empty()) {
    std::string s;
    for (double t : c.total_time_list_s) s += (s.empty() ? "" : " ") + fmt_g(t);
    kv("total_time_list_s", s);
  }
  kvd("rabi_frequency_hz", c.rabi_frequency_hz);
  kvd("pi_pulse_duration_s", c.pi_pulse_duration_s);
  kvb("instantaneous_pulses", c.instantaneous_pulses);
  kvd("gate_time_s", c.gate_time_s);
  kvd("j_coupling_hz", c.j_coupling_hz);
  kv("dd_targets", c.dd_targets);
  kvi("control_state", c.control_state);
  kvi("target_state", c.target_state);
  kvi("phase_points", c.phase_points);
  kvi("shots", c.shots);
  kv("readout", c.readout);
  kvi("runs", c.runs);
  kvi("seed", static_cast<long>(c.seed));
  kvi("threads", c.threads);
  kvd("drift_sigma_hz", c.drift_sigma_hz);
  kvd("drift_correlation", c.drift_correlation);
  kv("drift_mode", c.drift_mode);
  kvb("fast_noise", c.fast_noise);
  kvd("fast_noise_sigma_rad_s", c.fast_noise_sigma_rad_s);
  kvd("fast_noise_tau_c_s", c.fast_noise_tau_c_s);
  kvb("fast_noise_correlated", c.fast_noise_correlated);
  kvb("fast_noise_auto_calibrate", c.fast_noise_auto_calibrate);
  kvd("fast_noise_target_t2_s", c.fast_noise_target_t2_s);
  kvd("noise_dt_s", c.noise_dt_s);
  kvd("field_amplitude_rad_s", c.field_amplitude_rad_s);
  kvd("field_frequency_hz", c.field_frequency_hz);
  kvd("field_phase_rad", c.field_phase_rad);
  kvb("field_sync_to_sequence", c.field_sync_to_sequence);
  kvd("field_target_extra_phase_rad", c.field_target_extra_phase_rad);
  kvi("traces", c.traces);
  if (!c.out_dir.empty()) kv("out_dir", c.out_dir);
  kvb("dump_noise_trace", c.dump_noise_trace);
  kvb("dump_sequence", c.dump_sequence);
  return os.str();
}

PhysicsParams to_physics(const RunConfig& cfg) {
  PhysicsParams p;
  p.rabi_frequency = two_pi * cfg.rabi_frequency_hz;
  p.pi_pulse_duration = cfg.pi_pulse_duration_s;
  p.j = two_pi * cfg.j_coupling_hz;
  p.instantaneous_pulses = cfg.instantaneous_pulses;
  return p;
}

NoiseSettings to_noise_settings(const RunConfig& cfg) {
  NoiseSettings n;
  n.drift.sigma_hz = cfg.drift_sigma_hz;
  n.drift.correlation = cfg.drift_correlation;
  n.drift_mode = cfg.drift_mode == "off"      ? NoiseSettings::DriftMode::off
                 : cfg.drift_mode == "per_run" ? NoiseSettings::DriftMode::per_run
                                               : NoiseSettings::DriftMode::per_shot;
  if (cfg.fast_noise) {
    FastNoiseModel fm;
    fm.sigma = cfg.fast_noise_sigma_rad_s;
    fm.tau_c = cfg.fast_noise_tau_c_s;
    fm.dt = cfg.noise_dt_s;
    n.fast = fm;
  }
  n.fast_correlated = cfg.fast_noise_correlated;
  if (cfg.field_amplitude_rad_s != 0 && !cfg.field_sync_to_sequence) {
    CoherentFieldModel f;
    f.amplitude = cfg.field_amplitude_rad_s;
    f.frequency_hz = cfg.field_frequency_hz;
    f.phase = cfg.field_phase_rad;
    n.coherent = f;
  }
  n.dt = cfg.noise_dt_s;
  return n;
}

RamseyConfig to_ramsey_config(const RunConfig& cfg) {
  RamseyConfig r;
  r.control_state = cfg.control_state;
  r.target_state = cfg.target_state;
  r.sequence.family = family_from_string(cfg.sequence_family);
  r.sequence.count = cfg.pulse_count;
  r.total_time = cfg.total_time_s;
  r.dd_targets = cfg.dd_targets == "both" ? DDTargets::both : DDTargets::target_only;
  r.phase_points = cfg.phase_points;
  r.shots = cfg.shots;
  r.readout = cfg.readout == "sampled" ? ReadoutMode::sampled : ReadoutMode::exact;
  r.seed = cfg.seed;
  r.noise = to_noise_settings(cfg);
  r.physics = to_physics(cfg);
  r.threads = cfg.threads;
  return r;
}

}  // namespace ddsim
