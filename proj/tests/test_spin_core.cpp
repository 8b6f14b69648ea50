#include <doctest.h>

#include <algorithm>
#include <ddsim/errors.hpp>
#include <ddsim/rng.hpp>
#include <ddsim/sequences.hpp>
#include <ddsim/spin_core.hpp>
#include <vector>

#include "oracles.hpp"

using namespace ddsim;

namespace {

const Matrix2c sx = (Matrix2c() << 0, 1, 1, 0).finished();
const Matrix2c sy =
    (Matrix2c() << 0, complexd(0, -1), complexd(0, 1), 0).finished();
const complexd ci(0, 1);

Unitary4 kron(const Matrix2c& a, const Matrix2c& b) {
  Unitary4 u;
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k) u.block<2, 2>(2 * i, 2 * k) = a(i, k) * b;
  return u;
}

double max_abs_diff(const Unitary4& a, const Unitary4& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

PulseEvent pulse_at(double center, double duration, double phase, double angle,
                    TargetSet t) {
  PulseEvent p;
  p.center_time = center;
  p.duration = duration;
  p.phase = phase;
  p.angle = angle;
  p.targets = t;
  return p;
}

}  // namespace

TEST_CASE("free propagator: zero time is the identity") {
  const Unitary4 u = free_propagator(0.0, 1.2e4, -3.3e3, 7.7e2);
  CHECK(max_abs_diff(u, Unitary4::Identity()) < 1e-15);
}

TEST_CASE("free propagator: negative duration rejected") {
  CHECK_THROWS_AS(free_propagator(-1e-9, 0, 0, 0), std::invalid_argument);
}

TEST_CASE("free propagator: J*T = pi gives a pi conditional phase") {
  const double t_gate = 5e-3;
  const double j = pi / t_gate;  // 2 pi x 100 Hz
  CHECK(j == doctest::Approx(two_pi * 100.0));
  const Unitary4 u = free_propagator(t_gate, 0, 0, j);
  CHECK(std::abs(conditional_phase(u)) == doctest::Approx(pi).epsilon(1e-12));
}

TEST_CASE("free propagator: qubit-1 sector phases from the detuning") {
  const double d1 = two_pi * 20e3;
  const Unitary4 u = free_propagator(25e-6, d1, 0, 0);
  // delta1 * t / 2 = pi/2 on the |0x> sectors, -pi/2 on |1x>
  CHECK(std::arg(u(0, 0)) == doctest::Approx(-pi / 2).epsilon(1e-12));
  CHECK(std::arg(u(2, 2)) == doctest::Approx(pi / 2).epsilon(1e-12));
}

TEST_CASE("instantaneous pulse: pi about y on both qubits") {
  const Unitary4 u =
      instantaneous_pulse(pulse_at(0, 0, pi / 2, pi, TargetSet::both()));
  const Matrix2c miny = -ci * sy;
  CHECK(max_abs_diff(u, kron(miny, miny)) < 1e-15);
}

TEST_CASE("instantaneous pulse: clockwise pi about x on the target") {
  const Unitary4 u =
      instantaneous_pulse(pulse_at(0, 0, 0.0, -pi, TargetSet::target_only()));
  CHECK(max_abs_diff(u, kron(Matrix2c::Identity(), ci * sx)) < 1e-15);
}

TEST_CASE("instantaneous pulse: finite duration rejected") {
  CHECK_THROWS_AS(instantaneous_pulse(pulse_at(0, 1e-6, 0, pi, TargetSet::both())),
                  std::invalid_argument);
}

TEST_CASE("driven pulse: resonant pi pulse on the target") {
  const double omega = two_pi * 60e3;
  const double t_pi = pi / omega;
  const Unitary4 u = pulse_propagator(
      pulse_at(t_pi / 2, t_pi, 0.0, pi, TargetSet::target_only()), 0, 0, 0, omega);
  CHECK(max_abs_diff(u, kron(Matrix2c::Identity(), -ci * sx)) < 1e-12);
}

TEST_CASE("driven pulse: tilt and boost against the Rabi closed form") {
  const double omega = two_pi * 60e3;
  for (double ratio : {0.0, 0.1, 0.33, 1.0}) {
    const double delta = ratio * omega;
    const double t = pi / omega;  // nominal pi pulse
    const double phase = pi / 2;
    const Unitary4 u = pulse_propagator(
        pulse_at(t / 2, t, phase, pi, TargetSet::target_only()), 0, delta, 0, omega);

    // rotation by W t about (cos p, sin p, 0) * Omega/W + z * delta/W
    const double w = std::hypot(omega, delta);
    const double theta = w * t;
    Eigen::Vector3d axis(omega * std::cos(phase) / w, omega * std::sin(phase) / w,
                         delta / w);
    Matrix2c expected = std::cos(theta / 2) * Matrix2c::Identity() -
                        ci * std::sin(theta / 2) *
                            (axis.x() * sx + axis.y() * sy +
                             axis.z() * (Matrix2c() << 1, 0, 0, -1).finished());
    CHECK(max_abs_diff(u, kron(Matrix2c::Identity(), expected)) < 1e-9);

    // the advertised tilt/boost numbers
    CHECK(std::asin(axis.z()) == doctest::Approx(std::atan(ratio)).epsilon(1e-12));
    CHECK(theta ==
          doctest::Approx(pi * std::sqrt(1.0 + ratio * ratio)).epsilon(1e-12));
  }
}

TEST_CASE("driven pulse: matches the brute-force matrix exponential") {
  const double omega = two_pi * 60e3;
  const double j = two_pi * 100.0;
  const double t = 8.33e-6;
  for (const TargetSet targets :
       {TargetSet::both(), TargetSet::target_only(), TargetSet::control_only()}) {
    const PulseEvent p = pulse_at(t / 2, t, pi / 2, pi, targets);
    const double d1 = two_pi * 10e3, d2 = -two_pi * 4.2e3;
    const Unitary4 u = pulse_propagator(p, d1, d2, j, omega);
    const Unitary4 ref =
        oracles::expm_hamiltonian(driven_hamiltonian(p, d1, d2, j, omega), t);
    CHECK(max_abs_diff(u, ref) < 1e-9);
  }
}

TEST_CASE("driven pulse: preconditions") {
  const PulseEvent p = pulse_at(1e-6, 2e-6, 0, pi, TargetSet::both());
  CHECK_THROWS_AS(pulse_propagator(p, 0, 0, 0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(pulse_propagator(p, 0, 0, 0, -1.0), std::invalid_argument);
  const PulseEvent z = pulse_at(0, 0, 0, pi, TargetSet::both());
  CHECK_THROWS_AS(pulse_propagator(z, 0, 0, 0, 1.0), std::invalid_argument);
}

TEST_CASE("unitarity over random parameter draws") {
  RngStream rng = make_stream(42, {7});
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const double omega = two_pi * (1e3 + 99e3 * rng.uniform01());
    const double d1 = two_pi * 40e3 * (rng.uniform01() - 0.5);
    const double d2 = two_pi * 40e3 * (rng.uniform01() - 0.5);
    const double j = two_pi * 200.0 * rng.uniform01();
    const double t = 1e-6 + 20e-6 * rng.uniform01();
    const double phase = two_pi * rng.uniform01();
    const double angle = (rng.uniform01() < 0.5 ? 1 : -1) * pi;
    const Unitary4 u = pulse_propagator(pulse_at(t / 2, t, phase, angle,
                                                 TargetSet::both()),
                                        d1, d2, j, omega);
    worst = std::max(worst,
                     (u.adjoint() * u - Unitary4::Identity()).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("evolve: empty schedule and zero window leaves the state unchanged") {
  Sequence seq;  // empty family, T = 0
  const State4 psi = (basis_state(0, 0) + complexd(0, 1) * basis_state(1, 1)) /
                     std::sqrt(2.0);
  const State4 out = evolve(psi, seq, NoiseTrace::constant(1.0, 0, 0), {});
  CHECK((out - psi).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("evolve: conditional target precession at J*T = pi") {
  // each control sector advances the target phase by J*T/2, in opposite
  // directions, so the full splitting between sectors is J*T = pi
  const double t_gate = 5e-3;
  EvolveParams params;
  params.j = pi / t_gate;
  Sequence seq;
  seq.total_time = t_gate;
  const NoiseTrace quiet = NoiseTrace::constant(t_gate, 0, 0);

  auto target_phase = [&](int control, double j) {
    State4 psi = State4::Zero();
    psi(2 * control + 0) = 1.0 / std::sqrt(2.0);
    psi(2 * control + 1) = 1.0 / std::sqrt(2.0);
    EvolveParams p = params;
    p.j = j;
    const State4 out = evolve(psi, seq, quiet, p);
    return std::arg(out(2 * control + 1) / out(2 * control + 0));
  };

  const double shift0 = wrap_to_pm_pi(target_phase(0, params.j) - target_phase(0, 0));
  const double shift1 = wrap_to_pm_pi(target_phase(1, params.j) - target_phase(1, 0));
  CHECK(shift0 == doctest::Approx(pi / 2).epsilon(1e-12));
  CHECK(shift1 == doctest::Approx(-pi / 2).epsilon(1e-12));
  CHECK(circular_distance(shift0 - shift1, pi) < 1e-12);
}

TEST_CASE("evolve: norm preserved through a noisy finite-pulse schedule") {
  const double t = 5e-3;
  EvolveParams params;
  const double t_pi = pi / params.rabi_frequency;
  const Sequence seq = build_cpmg(24, t, t_pi, SequenceFamily::cpmg_xy,
                                  TargetSet::both());
  NoiseTrace tr;
  tr.dt = 1e-6;
  const size_t n = 5000;
  tr.delta1.resize(n);
  tr.delta2.resize(n);
  for (size_t k = 0; k < n; ++k) {
    tr.delta1[k] = two_pi * 15e3 * std::sin(0.37 * k);
    tr.delta2[k] = two_pi * 11e3 * std::cos(0.11 * k);
  }
  State4 psi = (basis_state(0, 0) + basis_state(1, 0)) / std::sqrt(2.0);
  psi = instantaneous_pulse(pulse_at(0, 0, 0, -pi / 2, TargetSet::target_only())) *
        psi;
  const State4 out = evolve(psi, seq, tr, params);
  CHECK(std::abs(out.squaredNorm() - 1.0) < 1e-10);
}

TEST_CASE("evolve: matches a single global time-ordered brute-force product") {
  const double t = 1.0e-3;
  EvolveParams params;
  const double t_pi = pi / params.rabi_frequency;
  const Sequence seq =
      build_cpmg(8, t, t_pi, SequenceFamily::cpmg_xy, TargetSet::both());

  NoiseTrace tr;
  tr.dt = 1e-6;
  const size_t n = 1000;
  tr.delta1.resize(n);
  tr.delta2.resize(n);
  for (size_t k = 0; k < n; ++k) {
    tr.delta1[k] = two_pi * 18e3 * std::sin(0.05 * k + 0.3);
    tr.delta2[k] = two_pi * 18e3 * std::sin(0.05 * k + 0.3);
  }

  // reference: time-ordered product over every [cell x pulse-edge] interval
  std::vector<double> edges{0.0, t};
  for (size_t k = 1; k < n; ++k) edges.push_back(k * tr.dt);
  for (const auto& p : seq.pulses) {
    edges.push_back(p.start());
    edges.push_back(p.end());
  }
  std::sort(edges.begin(), edges.end());
  Unitary4 ref = Unitary4::Identity();
  for (size_t i = 0; i + 1 < edges.size(); ++i) {
    const double a = edges[i], b = edges[i + 1];
    if (b - a < 1e-15) continue;
    const double mid = 0.5 * (a + b);
    const double d1 = tr.value1_at(mid), d2 = tr.value2_at(mid);
    const PulseEvent* inside = nullptr;
    for (const auto& p : seq.pulses)
      if (mid > p.start() && mid < p.end()) inside = &p;
    Eigen::Matrix4cd h;
    if (inside) {
      h = driven_hamiltonian(*inside, d1, d2, params.j, params.rabi_frequency);
    } else {
      h = Eigen::Matrix4cd::Zero();
      const Eigen::Vector4d e = free_phase_rates(d1, d2, params.j);
      for (int q = 0; q < 4; ++q) h(q, q) = e(q);
    }
    ref = oracles::expm_hamiltonian(h, b - a) * ref;
  }

  State4 psi = (basis_state(0, 0) + basis_state(1, 1)) / std::sqrt(2.0);
  const State4 via_evolve = evolve(psi, seq, tr, params);
  const State4 via_product = ref * psi;
  CHECK((via_evolve - via_product).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("evolve: overlapping pulses rejected") {
  Sequence seq;
  seq.family = SequenceFamily::custom;
  seq.total_time = 1e-3;
  seq.pulses.push_back(pulse_at(100e-6, 50e-6, 0, pi, TargetSet::both()));
  seq.pulses.push_back(pulse_at(120e-6, 50e-6, 0, pi, TargetSet::both()));
  CHECK_THROWS_AS(evolve(basis_state(0, 0), seq, NoiseTrace::constant(1e-3, 0, 0), {}),
                  ScheduleError);
}

TEST_CASE("evolve: short noise trace rejected") {
  Sequence seq;
  seq.total_time = 1e-3;
  NoiseTrace tr;
  tr.dt = 1e-6;
  tr.delta1.assign(100, 0.0);
  tr.delta2.assign(100, 0.0);
  CHECK_THROWS_AS(evolve(basis_state(0, 0), seq, tr, {}), std::invalid_argument);
}

TEST_CASE("commutation: simultaneous instantaneous pulse pairs keep J*T exactly") {
  const double t = 5e-3;
  EvolveParams params;
  params.j = 0.6 * pi / t;  // away from the wrap point
  const NoiseTrace quiet = NoiseTrace::constant(t, 0, 0);
  for (int n : {0, 4, 24, 84}) {
    const Sequence seq =
        build_cpmg(n, t, 0.0, SequenceFamily::cpmg_yy, TargetSet::both());
    const Unitary4 u = evolve_propagator(seq, quiet, params);
    CHECK(std::abs(std::abs(conditional_phase(u)) - params.j * t) < 1e-10);
  }
}

TEST_CASE("refocusing: target-only even-count CPMG kills the conditional phase") {
  const double t = 5e-3;
  EvolveParams params;
  params.j = pi / t;
  const NoiseTrace quiet = NoiseTrace::constant(t, 0, 0);
  for (int n : {2, 4, 24}) {
    const Sequence seq =
        build_cpmg(n, t, 0.0, SequenceFamily::cpmg_yy, TargetSet::target_only());
    const Unitary4 u = evolve_propagator(seq, quiet, params);
    CHECK(std::abs(conditional_phase(u)) < 1e-10);
  }
}

TEST_CASE("refocusing also removes a static target detuning") {
  const double t = 4e-3;
  EvolveParams params;
  params.j = 0;
  const NoiseTrace drifty = NoiseTrace::constant(t, 0, two_pi * 7e3);
  const Sequence seq =
      build_cpmg(8, t, 0.0, SequenceFamily::cpmg_yy, TargetSet::target_only());
  const Unitary4 u = evolve_propagator(seq, drifty, params);
  // net propagator acts trivially on the target phase: |01> and |00> agree
  CHECK(std::abs(std::arg(u(1, 1) * std::conj(u(0, 0)))) < 1e-10);
}
