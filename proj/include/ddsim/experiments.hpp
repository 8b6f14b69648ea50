#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "ddsim/filter.hpp"
#include "ddsim/noise.hpp"
#include "ddsim/sequences.hpp"
#include "ddsim/spin_core.hpp"

namespace ddsim {

// ---------------------------------------------------------------------------
// Monte-Carlo orchestration of the Ramsey-type experiments: a clockwise pi/2
// pulse about x on the target, a DD-protected conditional evolution window,
// then a clockwise pi/2 detection pulse about the scanned axis phi. Shots are
// independent trajectories; every random draw is keyed by
// (seed, run, shot, qubit) so results are reproducible under any parallel
// schedule.
// ---------------------------------------------------------------------------

struct PhysicsParams {
  double rabi_frequency = two_pi * 60e3;            // rad/s
  double pi_pulse_duration = pi / (two_pi * 60e3);  // s
  double j = two_pi * 100.0;                        // rad/s
  bool instantaneous_pulses = false;

  double t_pi() const { return instantaneous_pulses ? 0.0 : pi_pulse_duration; }
  EvolveParams evolve_params() const { return {rabi_frequency, j}; }
};

/// Which DD schedule to run in the window.
struct SequenceSpec {
  SequenceFamily family = SequenceFamily::cpmg_xy;
  int count = 24;  // pulse count (cpmg/pdd) or concatenation level (ccpmg)
};

Sequence build_sequence(const SequenceSpec& spec, double total_time, double t_pi,
                        TargetSet targets);

enum class DDTargets { both, target_only };
enum class ReadoutMode { sampled, exact };

struct RamseyConfig {
  int control_state = 0;
  int target_state = 0;
  SequenceSpec sequence;
  double total_time = 5e-3;
  DDTargets dd_targets = DDTargets::both;
  int phase_points = 25;
  int shots = 100;
  ReadoutMode readout = ReadoutMode::sampled;
  uint64_t seed = 1;
  uint64_t run_index = 0;
  NoiseSettings noise;
  PhysicsParams physics;
  int threads = 0;  // 0 = hardware concurrency
};

struct FringeResult {
  std::vector<double> phase;   // rad
  std::vector<double> p1;      // target excitation probability
  std::vector<double> p1_err;  // per-point standard error
  double contrast = 0;
  double phi_min = 0;  // fitted minimum position in [0, 2pi)
  double contrast_err = 0;
  double phi_min_err = 0;
  double fit_residual = 0;
  bool reliable = true;  // false when the fitted contrast is below 0.05
};

/// Least-squares fit of p(phi) = 1/2 (1 - C cos(phi - phi_min)).
FringeResult fit_fringe(std::span<const double> phase, std::span<const double> p1,
                        std::span<const double> p1_err);

FringeResult run_ramsey(const RamseyConfig& cfg);

struct FringeShiftScan {
  std::vector<double> total_time;
  std::vector<double> phi_min_control0;  // unwrapped from pi at T = 0
  std::vector<double> phi_min_control1;
  std::vector<bool> reliable;
};

/// Fitted minimum tracks vs window length for both control preparations,
/// unwrapped by nearest-branch continuation from the T = 0 minimum at pi.
FringeShiftScan fringe_shift_vs_time(const RamseyConfig& base,
                                     std::span<const double> t_list);

struct TruthTableResult {
  Eigen::Matrix4d populations = Eigen::Matrix4d::Zero();  // [input][output]
  double fidelity = 0;  // mean population of the correct output
};

/// Conditional spin flip: detection phase fixed at 3pi/2, inputs
/// |00>,|01>,|10>,|11>; the target flips iff the control is |1>.
TruthTableResult run_cnot(const RamseyConfig& base);

struct RobustnessPoint {
  int pulse_count = 0;
  double contrast = 0;
  double contrast_err = 0;
  double p_at_phi0 = 0;  // maximum-probe value at detection phase 0
  bool ok = true;
  std::string error;
};

/// Fringe contrast vs pulse number at fixed window length. Timing failures
/// from over-packed sequences are surfaced per point.
std::vector<RobustnessPoint> contrast_vs_pulse_number(SequenceFamily family,
                                                      std::span<const int> counts,
                                                      const RamseyConfig& base);

struct ConditionalShiftResult {
  std::vector<double> per_run_delta;  // wrapped fringe splitting per run
  double mean_abs_delta = 0;
  double pooled_delta = 0;  // splitting of the drift-ensemble-averaged fringes
  FringeResult pooled_control0;
  FringeResult pooled_control1;
};

/// Repeats the two-control-state fringe experiment over n_runs independent
/// drift draws (run r uses drift stream (seed, r)); both aggregates the
/// per-run splittings and fits the pooled per-phase statistics, mirroring
/// averaging over repeated experimental runs.
ConditionalShiftResult conditional_shift_ensemble(const RamseyConfig& base,
                                                  int n_runs);

struct LockinPoint {
  int pulse_count = 0;
  double extra_phase = 0;  // fringe-center displacement caused by the field
  bool ok = true;
};

/// Extra fringe displacement from a coherent field under the configured
/// sequence family, measured against the field-free run (which removes the
/// odd-pulse-count pi offset and any conditional shift).
LockinPoint extra_phase_with_field(const RamseyConfig& base,
                                   const CoherentFieldModel& field);

/// The lock-in study proper: PDD at each count with one fixed field.
std::vector<LockinPoint> pdd_lockin_study(const RamseyConfig& base,
                                          const CoherentFieldModel& field,
                                          std::span<const int> counts);

/// Discrete toggled integral int y(t) field(t) dt on the simulation grid;
/// the phase a unit-amplitude synced field imprints through the sequence.
double toggled_field_integral(const Sequence& seq, const CoherentFieldModel& field,
                              double dt);

struct DecayScan {
  std::vector<double> total_time;
  std::vector<double> contrast;
  std::vector<double> contrast_err;
  double one_over_e_time = 0;
  bool crossed = false;
};

/// Contrast vs window length; 1/e crossing by log-linear interpolation.
DecayScan contrast_vs_time(const RamseyConfig& base, std::span<const double> t_list);

struct CoherenceEstimate {
  double mean = 1;      // |E exp(i phi)| over trajectories
  double stat_err = 0;  // 1 sigma of the mean along its direction
};

/// Monte-Carlo mean coherence of a pure-dephasing trajectory ensemble under
/// the toggling sign of the sequence: phi = int y(t) delta2(t) dt. This is the
/// dephasing-integral shortcut valid for instantaneous pulses; it feeds the
/// filter-function consistency checks and the spectrum probe.
CoherenceEstimate mc_dephasing_coherence(const ToggleFunction& toggle,
                                         const FastNoiseModel& model, int n_traces,
                                         uint64_t seed, int threads = 0);

/// Chunked parallel loop; fn(i) must only write to slot i of preallocated
/// storage so the result is schedule independent.
void parallel_for(size_t n, int threads, const std::function<void(size_t)>& fn);

}  // namespace ddsim
