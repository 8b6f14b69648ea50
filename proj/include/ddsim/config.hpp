#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ddsim/experiments.hpp"

namespace ddsim {

inline constexpr const char* ddsim_version = "0.1.0";

// ---------------------------------------------------------------------------
// Run configuration: flat key = value text with '#' comments. Every physical
// quantity carries an explicit unit suffix in its key; unknown keys are
// rejected. Defaults reproduce the reference operating point (Rabi frequency
// 60 kHz, 20 kHz drift width, 5 ms gate with J * T_gate = pi).
// ---------------------------------------------------------------------------

struct RunConfig {
  std::string experiment = "ramsey";

  // sequence
  std::string sequence_family = "cpmg_xy";  // none|cpmg_yy|cpmg_xy|pdd_xy|ccpmg
  int pulse_count = 24;                     // pulse count, or ccpmg level
  std::vector<int> pulse_count_list;
  double total_time_s = 5e-3;
  std::vector<double> total_time_list_s;

  // physics
  double rabi_frequency_hz = 60e3;
  double pi_pulse_duration_s = -1;  // < 0: derived as pi/Omega
  bool instantaneous_pulses = false;
  double gate_time_s = 5e-3;
  double j_coupling_hz = -1;  // < 0: derived from J * T_gate = pi

  // protocol
  std::string dd_targets = "both";  // both|target_only
  int control_state = 0;
  int target_state = 0;
  int phase_points = 25;
  int shots = 100;
  std::string readout = "sampled";  // sampled|exact
  int runs = 1;
  uint64_t seed = 1;
  int threads = 0;

  // noise
  double drift_sigma_hz = 20e3;
  double drift_correlation = 1.0;
  std::string drift_mode = "per_run";  // off|per_run|per_shot
  bool fast_noise = true;
  double fast_noise_sigma_rad_s = -1;  // < 0: shipped calibration
  double fast_noise_tau_c_s = -1;      // < 0: shipped calibration
  bool fast_noise_correlated = true;
  bool fast_noise_auto_calibrate = false;
  double fast_noise_target_t2_s = 200e-6;
  double noise_dt_s = 1e-6;

  // coherent field
  double field_amplitude_rad_s = 0;
  double field_frequency_hz = 0;
  double field_phase_rad = 0;
  bool field_sync_to_sequence = false;
  double field_target_extra_phase_rad = 0;  // > 0: fit the amplitude

  // Monte-Carlo trajectory count for integral estimators (spectrum probe)
  int traces = 400;

  // output
  std::string out_dir;
  bool dump_noise_trace = false;
  bool dump_sequence = false;
};

/// Shipped defaults of the fast-noise model: stationary OU sigma calibrated so
/// the free-induction contrast decays to 1/e near 200 us, with the corner
/// placed so 24-pulse CPMG protection reaches about 10 ms.
double default_fast_noise_sigma();
double default_fast_noise_tau_c();

/// Parse and validate; throws ConfigError with the offending key.
RunConfig parse_config(const std::string& text);
RunConfig parse_config_file(const std::string& path);

/// Canonical text form (every key, fixed order); serialize(parse(x)) is
/// idempotent after the first normalization.
std::string serialize_config(const RunConfig& cfg);

/// Resolve derived fields and cross-check consistency (throws ConfigError).
void normalize_config(RunConfig& cfg);

// conversions to engine types
PhysicsParams to_physics(const RunConfig& cfg);
NoiseSettings to_noise_settings(const RunConfig& cfg);
RamseyConfig to_ramsey_config(const RunConfig& cfg);

struct Preset {
  std::string name;
  std::string description;
  std::string config_text;
};

/// The shipped figure-reproduction presets.
const std::vector<Preset>& list_presets();
const Preset& find_preset(const std::string& name);

struct RunManifest {
  std::string version;
  uint64_t seed = 0;
  double wall_clock_s = 0;
  std::string resolved_config;
  std::vector<std::pair<std::string, uint64_t>> checksums;  // file -> fnv1a64
};

/// Execute the configured experiment; writes summary.json, columnar data
/// files and manifest.txt under cfg.out_dir. Returns the manifest.
RunManifest run(const RunConfig& cfg);

}  // namespace ddsim
