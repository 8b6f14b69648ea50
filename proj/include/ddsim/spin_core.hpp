#pragma once

#include <Eigen/Dense>
#include <complex>

#include "ddsim/math_util.hpp"
#include "ddsim/noise_trace.hpp"

namespace ddsim {

using complexd = std::complex<double>;
using Unitary4 = Eigen::Matrix4cd;
using State4 = Eigen::Vector4cd;  // amplitudes ordered |00>,|01>,|10>,|11> (control x target)
using Matrix2c = Eigen::Matrix2cd;

// ---------------------------------------------------------------------------
// Conventions
//
// Qubit 1 is the control, qubit 2 the target. sigma_z|0> = +|0>, excitation
// probability P1 = (1 - <sigma_z>)/2. Dynamics live in the frame rotating at
// each qubit's nominal resonance, so only detunings delta_i enter.
//
// Free Hamiltonian (hbar = 1, all rates in rad/s):
//
//   H_free = (delta1/2) sz x I + (delta2/2) I x sz + (J/4) sz x sz
//
// The coupling is J * Sz x Sz with spin operators Sz = sz/2: J equals the full
// conditional splitting rate of the target fringe, so J * T_gate = pi defines
// the gate point, and the sign makes a control prepared in |0> advance the
// target's fringe phase.
//
// A pulse with phase phi and signed angle theta rotates addressed qubits by
// R(phi, theta) = exp(-i (theta/2) (cos(phi) sx + sin(phi) sy)); theta > 0 is
// anticlockwise about the in-plane axis (cos phi, sin phi, 0). A driven pulse
// replaces theta by the drive term sign(theta) * (Omega/2)(cos(phi) sx +
// sin(phi) sy) acting for the pulse duration.
// ---------------------------------------------------------------------------

/// Which qubits a pulse addresses.
struct TargetSet {
  bool qubit1 = false;
  bool qubit2 = false;

  static TargetSet both() { return {true, true}; }
  static TargetSet control_only() { return {true, false}; }
  static TargetSet target_only() { return {false, true}; }
  bool any() const { return qubit1 || qubit2; }
  bool operator==(const TargetSet&) const = default;
};

/// One rectangular microwave pulse. duration == 0 encodes the
/// instantaneous-pulse idealization.
struct PulseEvent {
  double center_time = 0;  // s
  double duration = 0;     // s, >= 0
  double phase = 0;        // rad, drive axis azimuth
  double angle = 0;        // rad, signed nominal rotation angle
  TargetSet targets = TargetSet::both();

  double start() const { return center_time - 0.5 * duration; }
  double end() const { return center_time + 0.5 * duration; }
};

struct QubitParams {
  double nominal_resonance = 0;           // rad/s, frame definition only
  double rabi_frequency = two_pi * 60e3;  // rad/s
  double pi_pulse_duration = pi / (two_pi * 60e3);  // s, defaults to pi/Omega

  static QubitParams with_rabi(double omega) {
    QubitParams q;
    q.rabi_frequency = omega;
    q.pi_pulse_duration = pi / omega;
    return q;
  }
};

struct CouplingParams {
  double j = two_pi * 100.0;  // rad/s, >= 0 in shipped configurations

  /// J fixed by the nominal gate time through J * t_gate = pi.
  static CouplingParams from_gate_time(double t_gate) { return {pi / t_gate}; }
  double gate_time() const { return pi / j; }
};

/// Diagonal phases E_i such that the free propagator is diag(exp(-i E_i t)).
Eigen::Vector4d free_phase_rates(double delta1, double delta2, double j);

/// exp(-i H_free * duration), closed form.
Unitary4 free_propagator(double duration, double delta1, double delta2, double j);

/// Single-qubit rotation R(phi, theta) about an equatorial axis.
Matrix2c equatorial_rotation(double phase, double angle);

/// Exact rotation of the addressed qubits, identity elsewhere.
/// Requires pulse.duration == 0.
Unitary4 instantaneous_pulse(const PulseEvent& pulse);

/// exp(-i H * duration) with H = H_free + drive on the addressed qubits;
/// exact 4x4 exponentiation through eigendecomposition.
/// Requires pulse.duration > 0 and omega > 0.
Unitary4 pulse_propagator(const PulseEvent& pulse, double delta1, double delta2,
                          double j, double omega);

/// The full driven 4x4 Hamiltonian of a pulse segment.
Eigen::Matrix4cd driven_hamiltonian(const PulseEvent& pulse, double delta1,
                                    double delta2, double j, double omega);

struct EvolveParams {
  double rabi_frequency = two_pi * 60e3;  // rad/s
  double j = two_pi * 100.0;              // rad/s
};

class Sequence;  // dd-sequences

/// Propagate a state through a validated pulse schedule over one noise
/// trajectory. Free segments are subdivided at the trace's cell boundaries
/// (noise held constant per cell); the per-cell detunings also enter the
/// driven Hamiltonian of finite-duration pulses.
State4 evolve(State4 state, const Sequence& schedule, const NoiseTrace& noise,
              const EvolveParams& params);

/// The total window propagator for one noise trajectory (columns = evolved
/// basis states). Same segmentation rules as evolve().
Unitary4 evolve_propagator(const Sequence& schedule, const NoiseTrace& noise,
                           const EvolveParams& params);

/// Basis state |control, target>.
inline State4 basis_state(int control, int target) {
  State4 s = State4::Zero();
  s(2 * control + target) = 1.0;
  return s;
}

/// Excitation probability of the target qubit.
inline double target_excitation(const State4& s) {
  return std::norm(s(1)) + std::norm(s(3));
}

/// In-sector relative phase splitting of a target-diagonal unitary:
/// arg(U11/U00) - arg(U33/U22), wrapped to (-pi, pi]. Throws if U has
/// significant off-diagonal weight.
double conditional_phase(const Unitary4& u, double offdiag_tol = 1e-9);

}  // namespace ddsim
