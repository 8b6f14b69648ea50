#include "ddsim/spin_core.hpp"

#include <Eigen/Eigenvalues>
#include <stdexcept>

#include "ddsim/errors.hpp"
#include "ddsim/sequences.hpp"

namespace ddsim {

namespace {

constexpr complexd ci(0.0, 1.0);

// sigma_z eigenvalue of basis index b in {0, 1}
inline double zsign(int b) { return b == 0 ? 1.0 : -1.0; }

inline Unitary4 kron2(const Matrix2c& a, const Matrix2c& b) {
  Unitary4 u;
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k)
      u.block<2, 2>(2 * i, 2 * k) = a(i, k) * b;
  return u;
}

// apply diag(exp(-i * rates * dt)) to the state in place
inline void apply_free_segment(State4& state, const Eigen::Vector4d& rates, double dt) {
  for (int i = 0; i < 4; ++i) state(i) *= std::exp(complexd(0.0, -rates(i) * dt));
}

}  // namespace

Eigen::Vector4d free_phase_rates(double delta1, double delta2, double j) {
  Eigen::Vector4d e;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const double s1 = zsign(a), s2 = zsign(b);
      e(2 * a + b) = 0.5 * (delta1 * s1 + delta2 * s2) + 0.25 * j * s1 * s2;
    }
  }
  return e;
}

Unitary4 free_propagator(double duration, double delta1, double delta2, double j) {
  if (duration < 0) throw std::invalid_argument("free_propagator: negative duration");
  const Eigen::Vector4d e = free_phase_rates(delta1, delta2, j);
  Unitary4 u = Unitary4::Zero();
  for (int i = 0; i < 4; ++i) u(i, i) = std::exp(complexd(0.0, -e(i) * duration));
  return u;
}

Matrix2c equatorial_rotation(double phase, double angle) {
  // exp(-i (angle/2) n.sigma) with n = (cos phase, sin phase, 0)
  const double c = std::cos(0.5 * angle);
  const double s = std::sin(0.5 * angle);
  Matrix2c r;
  r(0, 0) = c;
  r(0, 1) = -ci * s * std::exp(-ci * phase);
  r(1, 0) = -ci * s * std::exp(ci * phase);
  r(1, 1) = c;
  return r;
}

Unitary4 instantaneous_pulse(const PulseEvent& pulse) {
  if (pulse.duration != 0)
    throw std::invalid_argument("instantaneous_pulse: pulse has finite duration");
  const Matrix2c r = equatorial_rotation(pulse.phase, pulse.angle);
  const Matrix2c u1 = pulse.targets.qubit1 ? r : Matrix2c::Identity();
  const Matrix2c u2 = pulse.targets.qubit2 ? r : Matrix2c::Identity();
  return kron2(u1, u2);
}

Eigen::Matrix4cd driven_hamiltonian(const PulseEvent& pulse, double delta1,
                                    double delta2, double j, double omega) {
  const double sgn = pulse.angle >= 0 ? 1.0 : -1.0;
  const complexd hx = 0.5 * omega * sgn * std::exp(-ci * pulse.phase);  // <0|H|1> element

  Eigen::Matrix4cd h = Eigen::Matrix4cd::Zero();
  const Eigen::Vector4d e = free_phase_rates(delta1, delta2, j);
  for (int i = 0; i < 4; ++i) h(i, i) = e(i);

  if (pulse.targets.qubit1) {
    // drive x I: couples |0b> and |1b>
    for (int b = 0; b < 2; ++b) {
      h(b, 2 + b) += hx;
      h(2 + b, b) += std::conj(hx);
    }
  }
  if (pulse.targets.qubit2) {
    // I x drive: couples |a0> and |a1>
    for (int a = 0; a < 2; ++a) {
      h(2 * a, 2 * a + 1) += hx;
      h(2 * a + 1, 2 * a) += std::conj(hx);
    }
  }
  return h;
}

namespace {

inline Unitary4 exp_hermitian(const Eigen::Matrix4cd& h, double duration) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(h);
  Eigen::Vector4cd ph;
  for (int i = 0; i < 4; ++i)
    ph(i) = std::exp(complexd(0.0, -es.eigenvalues()(i) * duration));
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

// state <- exp(-i H dt) state via the same eigendecomposition
inline void apply_driven_segment(State4& state, const Eigen::Matrix4cd& h, double dt) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(h);
  Eigen::Vector4cd c = es.eigenvectors().adjoint() * state;
  for (int i = 0; i < 4; ++i) c(i) *= std::exp(complexd(0.0, -es.eigenvalues()(i) * dt));
  state = es.eigenvectors() * c;
}

}  // namespace

Unitary4 pulse_propagator(const PulseEvent& pulse, double delta1, double delta2,
                          double j, double omega) {
  if (omega <= 0) throw std::invalid_argument("pulse_propagator: omega must be > 0");
  if (pulse.duration <= 0)
    throw std::invalid_argument("pulse_propagator: driven pulse needs duration > 0");
  return exp_hermitian(driven_hamiltonian(pulse, delta1, delta2, j, omega),
                       pulse.duration);
}

namespace {

// Advance free evolution from t0 to t1, holding the noise constant per trace
// cell. Segment detunings are read at the sub-segment midpoint so boundary
// times never alias into the wrong cell.
void advance_free(State4& state, double t0, double t1, const NoiseTrace& noise,
                  double j) {
  const double eps = 1e-15 * std::max(1.0, std::abs(t1));
  double t = t0;
  while (t < t1 - eps) {
    const double cell_end =
        (std::floor(t / noise.dt + 1e-9) + 1.0) * noise.dt;
    const double next = std::min(t1, cell_end);
    if (next <= t + eps) break;
    const double mid = 0.5 * (t + next);
    const Eigen::Vector4d rates =
        free_phase_rates(noise.value1_at(mid), noise.value2_at(mid), j);
    apply_free_segment(state, rates, next - t);
    t = next;
  }
}

void advance_pulse(State4& state, const PulseEvent& pulse, const NoiseTrace& noise,
                   const EvolveParams& params) {
  const double t0 = pulse.start(), t1 = pulse.end();
  const double eps = 1e-15 * std::max(1.0, std::abs(t1));
  double t = t0;
  while (t < t1 - eps) {
    const double cell_end =
        (std::floor(t / noise.dt + 1e-9) + 1.0) * noise.dt;
    const double next = std::min(t1, cell_end);
    if (next <= t + eps) break;
    const double mid = 0.5 * (t + next);
    const Eigen::Matrix4cd h = driven_hamiltonian(
        pulse, noise.value1_at(mid), noise.value2_at(mid), params.j,
        params.rabi_frequency);
    apply_driven_segment(state, h, next - t);
    t = next;
  }
}

}  // namespace

State4 evolve(State4 state, const Sequence& schedule, const NoiseTrace& noise,
              const EvolveParams& params) {
  const double total = schedule.total_time;
  if (noise.duration() < total - 1e-12)
    throw std::invalid_argument("evolve: noise trace shorter than the window");

  double cursor = 0;
  const PulseEvent* prev = nullptr;
  for (const PulseEvent& p : schedule.pulses) {
    if (p.start() < cursor - 1e-15 || p.end() > total + 1e-12) {
      if (prev && p.start() < prev->end() - 1e-15)
        throw ScheduleError("evolve: overlapping pulses");
      throw ScheduleError("evolve: pulse outside the window or out of order");
    }
    advance_free(state, cursor, p.start(), noise, params.j);
    if (p.duration == 0) {
      state = instantaneous_pulse(p) * state;
    } else {
      advance_pulse(state, p, noise, params);
    }
    cursor = p.end();
    prev = &p;
  }
  advance_free(state, cursor, total, noise, params.j);
  return state;
}

Unitary4 evolve_propagator(const Sequence& schedule, const NoiseTrace& noise,
                           const EvolveParams& params) {
  Unitary4 u;
  for (int col = 0; col < 4; ++col) {
    State4 e = State4::Zero();
    e(col) = 1.0;
    u.col(col) = evolve(e, schedule, noise, params);
  }
  return u;
}

double conditional_phase(const Unitary4& u, double offdiag_tol) {
  double offdiag = 0;
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k)
      if (i != k) offdiag = std::max(offdiag, std::abs(u(i, k)));
  if (offdiag > offdiag_tol)
    throw std::invalid_argument("conditional_phase: unitary is not diagonal");
  const double phi0 = std::arg(u(1, 1) * std::conj(u(0, 0)));
  const double phi1 = std::arg(u(3, 3) * std::conj(u(2, 2)));
  return wrap_to_pm_pi(phi0 - phi1);
}

}  // namespace ddsim
