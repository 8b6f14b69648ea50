#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ddsim/config.hpp"
#include "ddsim/errors.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace ddsim {

namespace {

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class ArtifactWriter {
 public:
  explicit ArtifactWriter(const fs::path& dir) : dir_(dir) {
    fs::create_directories(dir_);
  }

  void write(const std::string& name, const std::string& content) {
    std::ofstream f(dir_ / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir_ / name).string());
    f << content;
    checksums_.emplace_back(name, fnv1a64(content.data(), content.size()));
  }

  const std::vector<std::pair<std::string, uint64_t>>& checksums() const {
    return checksums_;
  }
  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::vector<std::pair<std::string, uint64_t>> checksums_;
};

std::string fringe_table(const FringeResult& f) {
  std::ostringstream os;
  os << "# phase_rad p1 p1_stderr\n";
  for (size_t i = 0; i < f.phase.size(); ++i)
    os << fmt_g(f.phase[i]) << " " << fmt_g(f.p1[i]) << " " << fmt_g(f.p1_err[i])
       << "\n";
  return os.str();
}

json fringe_summary(const FringeResult& f) {
  return json{{"contrast", f.contrast},
              {"contrast_err", f.contrast_err},
              {"phi_min_rad", f.phi_min},
              {"phi_min_err_rad", f.phi_min_err},
              {"fit_residual", f.fit_residual},
              {"reliable", f.reliable}};
}

CoherentFieldModel resolve_field(const RunConfig& cfg) {
  const PhysicsParams phys = to_physics(cfg);
  const Sequence ref = build_pdd(cfg.pulse_count, cfg.total_time_s, phys.t_pi(),
                                 TargetSet::both());
  const double spacing = ref.base_interval + phys.t_pi();
  const double first = ref.pulses.front().center_time;
  CoherentFieldModel f = synced_field(1.0, spacing, first);
  if (cfg.field_target_extra_phase_rad > 0) {
    const double unit = toggled_field_integral(ref, f, cfg.noise_dt_s);
    if (std::abs(unit) < 1e-12)
      throw CalibrationError("pdd_lockin: synchronized field picks up no phase");
    f.amplitude = cfg.field_target_extra_phase_rad / unit;
  } else {
    f.amplitude = cfg.field_amplitude_rad_s;
  }
  return f;
}

}  // namespace

RunManifest run(const RunConfig& config) {
  const auto t_start = std::chrono::steady_clock::now();
  RunConfig cfg = config;  // normalized copy; calibration may refine it

  if (cfg.fast_noise && cfg.fast_noise_auto_calibrate)
    cfg.fast_noise_sigma_rad_s =
        calibrate_fast_noise(cfg.fast_noise_target_t2_s, cfg.fast_noise_tau_c_s);

  fs::path out = cfg.out_dir.empty() ? fs::path("ddsim_runs") / cfg.experiment
                                     : fs::path(cfg.out_dir);
  ArtifactWriter w(out);

  json summary;
  summary["experiment"] = cfg.experiment;
  summary["seed"] = cfg.seed;
  summary["version"] = ddsim_version;
  summary["warnings"] = json::array();
  if (cfg.fast_noise) {
    summary["fast_noise_sigma_rad_s"] = cfg.fast_noise_sigma_rad_s;
    summary["fast_noise_tau_c_s"] = cfg.fast_noise_tau_c_s;
  }
  summary["drift_mode"] = cfg.drift_mode;

  const RamseyConfig base = to_ramsey_config(cfg);

  if (cfg.experiment == "ramsey") {
    std::vector<double> t_list = cfg.total_time_list_s;
    if (t_list.empty()) t_list = {cfg.total_time_s};
    json per_window = json::array();
    for (size_t i = 0; i < t_list.size(); ++i) {
      RamseyConfig rc = base;
      rc.total_time = t_list[i];
      rc.run_index = i;
      const FringeResult f = run_ramsey(rc);
      const std::string name = "fringe_" + std::to_string(i) + ".txt";
      w.write(name, fringe_table(f));
      json j = fringe_summary(f);
      j["total_time_s"] = t_list[i];
      j["file"] = name;
      if (!f.reliable)
        summary["warnings"].push_back("unreliable fit at window " + std::to_string(i));
      per_window.push_back(j);
    }
    summary["fringes"] = per_window;
    if (cfg.dump_sequence) {
      const Sequence seq = build_sequence(base.sequence, t_list.front(),
                                          base.physics.t_pi(),
                                          cfg.dd_targets == "both"
                                              ? TargetSet::both()
                                              : TargetSet::target_only());
      w.write("sequence.txt", serialize_sequence(seq));
    }
    if (cfg.dump_noise_trace) {
      const NoiseTrace tr =
          compose_noise_trace(base.noise, t_list.front(), cfg.seed, 0, 0);
      std::ostringstream os;
      os << "# time_s delta1_rad_s delta2_rad_s\n";
      for (size_t k = 0; k < tr.delta1.size(); ++k)
        os << fmt_g(k * tr.dt) << " " << fmt_g(tr.delta1[k]) << " "
           << fmt_g(tr.delta2[k]) << "\n";
      w.write("noise_trace.txt", os.str());
    }

  } else if (cfg.experiment == "fringe_shift_scan") {
    if (cfg.total_time_list_s.empty())
      throw ConfigError("fringe_shift_scan: total_time_list_s is required");
    const FringeShiftScan scan = fringe_shift_vs_time(base, cfg.total_time_list_s);
    std::ostringstream os;
    os << "# total_time_s phi_min_control0_rad phi_min_control1_rad reliable\n";
    for (size_t i = 0; i < scan.total_time.size(); ++i)
      os << fmt_g(scan.total_time[i]) << " " << fmt_g(scan.phi_min_control0[i]) << " "
         << fmt_g(scan.phi_min_control1[i]) << " " << (scan.reliable[i] ? 1 : 0)
         << "\n";
    w.write("tracks.txt", os.str());
    const LinearFit f0 = fit_line(scan.total_time, scan.phi_min_control0);
    const LinearFit f1 = fit_line(scan.total_time, scan.phi_min_control1);
    summary["track_slope_control0_rad_s"] = f0.slope;
    summary["track_slope_control1_rad_s"] = f1.slope;
    summary["expected_abs_slope_rad_s"] = pi * cfg.j_coupling_hz;  // J/2

  } else if (cfg.experiment == "conditional_ensemble") {
    const ConditionalShiftResult res = conditional_shift_ensemble(base, cfg.runs);
    w.write("fringe_c0.txt", fringe_table(res.pooled_control0));
    w.write("fringe_c1.txt", fringe_table(res.pooled_control1));
    std::ostringstream os;
    os << "# run delta_rad\n";
    for (size_t r = 0; r < res.per_run_delta.size(); ++r)
      os << r << " " << fmt_g(res.per_run_delta[r]) << "\n";
    w.write("ensemble.txt", os.str());
    summary["pooled_delta_rad"] = res.pooled_delta;
    summary["mean_abs_delta_rad"] = res.mean_abs_delta;
    summary["pooled_control0"] = fringe_summary(res.pooled_control0);
    summary["pooled_control1"] = fringe_summary(res.pooled_control1);
    summary["runs"] = cfg.runs;

  } else if (cfg.experiment == "cnot") {
    const TruthTableResult res = run_cnot(base);
    RamseyConfig clean = base;
    clean.noise.drift_mode = NoiseSettings::DriftMode::off;
    clean.noise.fast.reset();
    clean.noise.coherent.reset();
    clean.readout = ReadoutMode::exact;
    clean.shots = 1;
    const TruthTableResult ideal = run_cnot(clean);

    std::ostringstream os;
    os << "# input p00 p01 p10 p11\n";
    const char* labels[4] = {"00", "01", "10", "11"};
    for (int i = 0; i < 4; ++i) {
      os << labels[i];
      for (int o = 0; o < 4; ++o) os << " " << fmt_g(res.populations(i, o));
      os << "\n";
    }
    w.write("truth_table.txt", os.str());
    summary["fidelity"] = res.fidelity;
    summary["noise_free_fidelity"] = ideal.fidelity;

  } else if (cfg.experiment == "robustness") {
    std::vector<int> counts = cfg.pulse_count_list;
    if (counts.empty()) counts = {4, 8, 16, 24, 32, 48, 64, 84};
    std::ostringstream os;
    os << "# family n contrast contrast_err p_at_phi0 ok\n";
    json fam_summary;
    const struct {
      SequenceFamily family;
      const char* name;
    } fams[] = {{SequenceFamily::cpmg_yy, "cpmg_yy"},
                {SequenceFamily::cpmg_xy, "cpmg_xy"},
                {SequenceFamily::ccpmg, "ccpmg"}};
    for (const auto& fam : fams) {
      std::vector<int> n_list = counts;
      if (fam.family == SequenceFamily::ccpmg) {
        n_list.clear();
        for (int lvl = 1; lvl <= 6 && ccpmg_pulse_count(lvl) <=
                                          *std::max_element(counts.begin(), counts.end());
             ++lvl)
          n_list.push_back(lvl);
      }
      const auto points = contrast_vs_pulse_number(fam.family, n_list, base);
      json arr = json::array();
      for (const auto& pt : points) {
        const int n = fam.family == SequenceFamily::ccpmg
                          ? static_cast<int>(ccpmg_pulse_count(pt.pulse_count))
                          : pt.pulse_count;
        os << fam.name << " " << n << " " << fmt_g(pt.contrast) << " "
           << fmt_g(pt.contrast_err) << " " << fmt_g(pt.p_at_phi0) << " "
           << (pt.ok ? 1 : 0) << "\n";
        arr.push_back({{"n", n},
                       {"contrast", pt.contrast},
                       {"p_at_phi0", pt.p_at_phi0},
                       {"ok", pt.ok}});
      }
      fam_summary[fam.name] = arr;
    }
    w.write("robustness.txt", os.str());
    summary["families"] = fam_summary;

  } else if (cfg.experiment == "pdd_lockin") {
    if (family_from_string(cfg.sequence_family) != SequenceFamily::pdd_xy)
      throw ConfigError("pdd_lockin: sequence_family must be pdd_xy");
    const CoherentFieldModel field = resolve_field(cfg);
    std::vector<int> counts = cfg.pulse_count_list;
    if (counts.empty()) counts = {cfg.pulse_count};
    const auto points = pdd_lockin_study(base, field, counts);
    std::ostringstream os;
    os << "# n extra_phase_rad ok\n";
    for (const auto& pt : points)
      os << pt.pulse_count << " " << fmt_g(pt.extra_phase) << " " << (pt.ok ? 1 : 0)
         << "\n";
    w.write("lockin.txt", os.str());
    summary["field_amplitude_rad_s"] = field.amplitude;
    summary["field_frequency_hz"] = field.frequency_hz;
    for (const auto& pt : points)
      if (pt.pulse_count == cfg.pulse_count)
        summary["extra_phase_at_reference_rad"] = pt.extra_phase;

  } else if (cfg.experiment == "spectrum_probe") {
    if (!cfg.fast_noise) throw ConfigError("spectrum_probe: fast_noise must be on");
    std::vector<int> counts = cfg.pulse_count_list;
    if (counts.empty()) counts = {20, 40, 100, 250, 500, 1000};
    FastNoiseModel model;
    model.sigma = cfg.fast_noise_sigma_rad_s;
    model.tau_c = cfg.fast_noise_tau_c_s;
    model.dt = cfg.noise_dt_s;

    std::vector<double> contrasts(counts.size());
    for (size_t i = 0; i < counts.size(); ++i) {
      const Sequence seq = build_cpmg(counts[i], cfg.total_time_s, 0.0,
                                      SequenceFamily::cpmg_yy, TargetSet::target_only());
      const CoherenceEstimate est =
          mc_dephasing_coherence(toggle_from_sequence(seq), model, cfg.traces,
                                 cfg.seed + i, cfg.threads);
      contrasts[i] = est.mean;
    }
    const auto points = probe_spectrum(counts, cfg.total_time_s, contrasts);
    std::ostringstream os;
    os << "# f_hz S_value passband_width_hz S_model contrast\n";
    for (size_t i = 0; i < points.size(); ++i)
      os << fmt_g(points[i].freq_hz) << " " << fmt_g(points[i].value) << " "
         << fmt_g(points[i].passband_width_hz) << " "
         << fmt_g(ou_spectrum(model.sigma, model.tau_c, two_pi * points[i].freq_hz))
         << " " << fmt_g(contrasts[i]) << "\n";
    w.write("spectrum.txt", os.str());
    summary["loglog_slope_1k_50k"] = probe_slope(points, 1e3, 50e3);

  } else if (cfg.experiment == "dephasing_scan") {
    if (cfg.total_time_list_s.empty())
      throw ConfigError("dephasing_scan: total_time_list_s is required");
    RamseyConfig rc = base;
    rc.sequence.family = SequenceFamily::empty;
    const DecayScan scan = contrast_vs_time(rc, cfg.total_time_list_s);
    std::ostringstream os;
    os << "# total_time_s contrast contrast_err\n";
    for (size_t i = 0; i < scan.total_time.size(); ++i)
      os << fmt_g(scan.total_time[i]) << " " << fmt_g(scan.contrast[i]) << " "
         << fmt_g(scan.contrast_err[i]) << "\n";
    w.write("dephasing.txt", os.str());
    summary["one_over_e_time_s"] = scan.one_over_e_time;
    summary["one_over_e_crossed"] = scan.crossed;

  } else if (cfg.experiment == "drift_sample") {
    const NoiseSettings noise = to_noise_settings(cfg);
    std::ostringstream os;
    os << "# run delta1_rad_s delta2_rad_s\n";
    std::vector<double> d1(cfg.runs), d2(cfg.runs);
    for (int r = 0; r < cfg.runs; ++r) {
      RngStream rng = make_stream(
          cfg.seed, {static_cast<uint64_t>(StreamPurpose::drift),
                     static_cast<uint64_t>(r)});
      const DriftSample d = sample_drift(noise.drift, rng);
      d1[r] = d.delta1;
      d2[r] = d.delta2;
      os << r << " " << fmt_g(d.delta1) << " " << fmt_g(d.delta2) << "\n";
    }
    w.write("drift_samples.txt", os.str());
    summary["sample_sd_hz"] = sample_std(d1) / two_pi;
    summary["configured_sigma_hz"] = cfg.drift_sigma_hz;

  } else {
    throw ConfigError("experiment: unknown kind '" + cfg.experiment + "'");
  }

  w.write("summary.json", summary.dump(2) + "\n");

  RunManifest man;
  man.version = ddsim_version;
  man.seed = cfg.seed;
  man.resolved_config = serialize_config(cfg);
  man.checksums = w.checksums();
  man.wall_clock_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();

  std::ostringstream os;
  os << "# ddsim run manifest\n";
  os << "version " << man.version << "\n";
  os << "seed " << man.seed << "\n";
  os << "wall_clock_s " << fmt_g(man.wall_clock_s) << "\n";
  os << "files:\n";
  char hex[24];
  for (const auto& [name, sum] : man.checksums) {
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(sum));
    os << "  " << name << " fnv1a64:" << hex << "\n";
  }
  os << "config:\n";
  std::istringstream cfg_lines(man.resolved_config);
  std::string line;
  while (std::getline(cfg_lines, line)) os << "  " << line << "\n";
  {
    std::ofstream f(w.dir() / "manifest.txt", std::ios::binary);
    f << os.str();
  }
  return man;
}

}  // namespace ddsim
