#include "ddsim/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>

#include "ddsim/errors.hpp"

namespace ddsim {

void parallel_for(size_t n, int threads, const std::function<void(size_t)>& fn) {
  if (threads <= 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    threads = hw == 0 ? 1 : static_cast<int>(hw);
  }
  threads = std::clamp(threads, 1, 16);
  if (threads == 1 || n < 4) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= n || failed.load(std::memory_order_relaxed)) return;
      try {
        fn(i);
      } catch (...) {
        std::scoped_lock lk(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads - 1);
  for (int t = 0; t < threads - 1; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

Sequence build_sequence(const SequenceSpec& spec, double total_time, double t_pi,
                        TargetSet targets) {
  switch (spec.family) {
    case SequenceFamily::empty:
      return build_cpmg(0, total_time, t_pi, SequenceFamily::cpmg_yy, targets);
    case SequenceFamily::cpmg_yy:
    case SequenceFamily::cpmg_xy:
      return build_cpmg(spec.count, total_time, t_pi, spec.family, targets);
    case SequenceFamily::pdd_xy:
      return build_pdd(spec.count, total_time, t_pi, targets);
    case SequenceFamily::ccpmg:
      return schedule_ccpmg(spec.count, total_time, t_pi, targets);
    case SequenceFamily::custom:
      break;
  }
  throw std::invalid_argument("build_sequence: custom schedules are built by hand");
}

namespace {

// First Ramsey pulse: clockwise pi/2 about x on the target.
State4 prepare_state(int control, int target) {
  PulseEvent first;
  first.phase = 0;
  first.angle = -pi / 2;
  first.duration = 0;
  first.targets = TargetSet::target_only();
  return instantaneous_pulse(first) * basis_state(control, target);
}

// Detection pulse: clockwise pi/2 about the axis at azimuth phi.
Unitary4 detection_unitary(double phi) {
  PulseEvent det;
  det.phase = phi;
  det.angle = -pi / 2;
  det.duration = 0;
  det.targets = TargetSet::target_only();
  return instantaneous_pulse(det);
}

TargetSet dd_target_set(DDTargets t) {
  return t == DDTargets::both ? TargetSet::both() : TargetSet::target_only();
}

double binomial_se(long hits, int n) {
  const double pt = (static_cast<double>(hits) + 1.0) / (n + 2.0);
  return std::sqrt(pt * (1.0 - pt) / n);
}

}  // namespace

FringeResult fit_fringe(std::span<const double> phase, std::span<const double> p1,
                        std::span<const double> p1_err) {
  const auto n = static_cast<Eigen::Index>(phase.size());
  if (n < 4 || p1.size() != phase.size())
    throw std::invalid_argument("fit_fringe: need >= 4 matched points");

  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = std::cos(phase[i]);
    x(i, 2) = std::sin(phase[i]);
    y(i) = p1[i];
  }
  const Eigen::Matrix3d g = x.transpose() * x;
  const Eigen::Vector3d coef = g.ldlt().solve(x.transpose() * y);
  const double ac = coef(1), as = coef(2);
  const double r = std::hypot(ac, as);

  FringeResult out;
  out.phase.assign(phase.begin(), phase.end());
  out.p1.assign(p1.begin(), p1.end());
  out.p1_err.assign(p1_err.begin(), p1_err.end());
  out.contrast = 2.0 * r;
  out.phi_min = r > 0 ? wrap_to_2pi(std::atan2(-as, -ac)) : 0.0;

  const Eigen::VectorXd resid = y - x * coef;
  out.fit_residual = std::sqrt(resid.squaredNorm() / static_cast<double>(n));
  if (n > 3 && r > 0) {
    const double s2 = resid.squaredNorm() / static_cast<double>(n - 3);
    const Eigen::Matrix3d cov = s2 * g.inverse();
    const Eigen::Vector2d grad_c(2.0 * ac / r, 2.0 * as / r);
    const Eigen::Vector2d grad_p(as / (r * r), -ac / (r * r));
    const Eigen::Matrix2d cov2 = cov.block<2, 2>(1, 1);
    out.contrast_err = std::sqrt(std::max(0.0, double(grad_c.dot(cov2 * grad_c))));
    out.phi_min_err = std::sqrt(std::max(0.0, double(grad_p.dot(cov2 * grad_p))));
  }
  out.reliable = out.contrast >= 0.05;
  return out;
}

namespace {

// Target excitation probabilities for every (phase point, shot). Collapses to
// one trajectory when the noise settings are shot independent.
std::vector<double> ramsey_probabilities(const RamseyConfig& cfg, const Sequence& seq,
                                         const std::vector<Unitary4>& det) {
  const int np = static_cast<int>(det.size());
  const int ns = cfg.shots;
  const State4 prep = prepare_state(cfg.control_state, cfg.target_state);
  const EvolveParams params = cfg.physics.evolve_params();
  std::vector<double> p(static_cast<size_t>(np) * ns);

  if (!cfg.noise.shot_dependent()) {
    const NoiseTrace trace =
        compose_noise_trace(cfg.noise, cfg.total_time, cfg.seed, cfg.run_index, 0);
    const State4 after = evolve(prep, seq, trace, params);
    for (int j = 0; j < np; ++j) {
      const double pj = target_excitation(det[j] * after);
      std::fill_n(p.begin() + static_cast<size_t>(j) * ns, ns, pj);
    }
    return p;
  }

  parallel_for(p.size(), cfg.threads, [&](size_t idx) {
    const NoiseTrace trace =
        compose_noise_trace(cfg.noise, cfg.total_time, cfg.seed, cfg.run_index, idx);
    const State4 st = evolve(prep, seq, trace, params);
    p[idx] = target_excitation(det[idx / ns] * st);
  });
  return p;
}

}  // namespace

FringeResult run_ramsey(const RamseyConfig& cfg) {
  if (cfg.phase_points < 8)
    throw std::invalid_argument("run_ramsey: phase grid needs >= 8 points");
  if (cfg.shots < 1) throw std::invalid_argument("run_ramsey: shots must be >= 1");
  if (cfg.control_state < 0 || cfg.control_state > 1 || cfg.target_state < 0 ||
      cfg.target_state > 1)
    throw std::invalid_argument("run_ramsey: preparation must be a basis state");

  const Sequence seq = build_sequence(cfg.sequence, cfg.total_time, cfg.physics.t_pi(),
                                      dd_target_set(cfg.dd_targets));
  const int np = cfg.phase_points, ns = cfg.shots;
  std::vector<double> phases(np);
  std::vector<Unitary4> det(np);
  for (int j = 0; j < np; ++j) {
    phases[j] = two_pi * j / np;
    det[j] = detection_unitary(phases[j]);
  }

  const std::vector<double> p = ramsey_probabilities(cfg, seq, det);

  std::vector<double> pj(np), ej(np);
  for (int j = 0; j < np; ++j) {
    const double* row = p.data() + static_cast<size_t>(j) * ns;
    if (cfg.readout == ReadoutMode::sampled) {
      long hits = 0;
      for (int s = 0; s < ns; ++s) {
        RngStream rs = make_stream(
            cfg.seed, {static_cast<uint64_t>(StreamPurpose::readout), cfg.run_index,
                       static_cast<uint64_t>(j) * ns + s});
        if (rs.uniform01() < row[s]) ++hits;
      }
      pj[j] = static_cast<double>(hits) / ns;
      ej[j] = binomial_se(hits, ns);
    } else {
      pj[j] = mean({row, static_cast<size_t>(ns)});
      ej[j] = ns > 1 ? sample_std({row, static_cast<size_t>(ns)}) / std::sqrt(ns) : 0.0;
    }
  }
  return fit_fringe(phases, pj, ej);
}

FringeShiftScan fringe_shift_vs_time(const RamseyConfig& base,
                                     std::span<const double> t_list) {
  std::vector<size_t> order(t_list.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return t_list[a] < t_list[b]; });

  FringeShiftScan scan;
  scan.total_time.resize(t_list.size());
  scan.phi_min_control0.resize(t_list.size());
  scan.phi_min_control1.resize(t_list.size());
  scan.reliable.resize(t_list.size());

  double prev0 = pi, prev1 = pi;  // T = 0 minima sit at pi
  for (size_t rank = 0; rank < order.size(); ++rank) {
    const size_t i = order[rank];
    RamseyConfig cfg = base;
    cfg.total_time = t_list[i];
    cfg.run_index = base.run_index + rank;
    cfg.control_state = 0;
    const FringeResult f0 = run_ramsey(cfg);
    cfg.control_state = 1;
    const FringeResult f1 = run_ramsey(cfg);

    prev0 = prev0 + wrap_to_pm_pi(f0.phi_min - prev0);
    prev1 = prev1 + wrap_to_pm_pi(f1.phi_min - prev1);
    scan.total_time[i] = t_list[i];
    scan.phi_min_control0[i] = prev0;
    scan.phi_min_control1[i] = prev1;
    scan.reliable[i] = f0.reliable && f1.reliable;
  }
  return scan;
}

TruthTableResult run_cnot(const RamseyConfig& base) {
  const Sequence seq = build_sequence(base.sequence, base.total_time,
                                      base.physics.t_pi(),
                                      dd_target_set(base.dd_targets));
  const Unitary4 det = detection_unitary(3.0 * pi / 2.0);
  const EvolveParams params = base.physics.evolve_params();
  const int ns = base.shots;

  Eigen::Matrix4d pop = Eigen::Matrix4d::Zero();
  if (!base.noise.shot_dependent()) {
    const NoiseTrace trace =
        compose_noise_trace(base.noise, base.total_time, base.seed, base.run_index, 0);
    const Unitary4 window = evolve_propagator(seq, trace, params);
    for (int input = 0; input < 4; ++input) {
      const State4 after = det * (window * prepare_state(input >> 1, input & 1));
      for (int out = 0; out < 4; ++out) pop(input, out) = std::norm(after(out));
    }
  } else {
    std::vector<double> probs(static_cast<size_t>(4) * ns * 4);
    parallel_for(static_cast<size_t>(4) * ns, base.threads, [&](size_t idx) {
      const int input = static_cast<int>(idx / ns);
      const NoiseTrace trace = compose_noise_trace(base.noise, base.total_time,
                                                   base.seed, base.run_index, idx);
      State4 st = prepare_state(input >> 1, input & 1);
      st = det * evolve(st, seq, trace, params);
      for (int out = 0; out < 4; ++out) probs[idx * 4 + out] = std::norm(st(out));
    });
    for (int input = 0; input < 4; ++input) {
      for (int s = 0; s < ns; ++s) {
        const size_t idx = static_cast<size_t>(input) * ns + s;
        if (base.readout == ReadoutMode::sampled) {
          RngStream rs = make_stream(
              base.seed, {static_cast<uint64_t>(StreamPurpose::readout),
                          base.run_index, 0xC0Full, idx});
          const double u = rs.uniform01();
          double cum = 0;
          int out = 3;
          for (int k = 0; k < 4; ++k) {
            cum += probs[idx * 4 + k];
            if (u < cum) {
              out = k;
              break;
            }
          }
          pop(input, out) += 1.0;
        } else {
          for (int out = 0; out < 4; ++out) pop(input, out) += probs[idx * 4 + out];
        }
      }
    }
    pop /= static_cast<double>(ns);
  }

  TruthTableResult res;
  res.populations = pop;
  double f = 0;
  for (int input = 0; input < 4; ++input) {
    const int a = input >> 1, t = input & 1;
    f += pop(input, 2 * a + (t ^ a));  // target flips iff control is |1>
  }
  res.fidelity = f / 4.0;
  return res;
}

std::vector<RobustnessPoint> contrast_vs_pulse_number(SequenceFamily family,
                                                      std::span<const int> counts,
                                                      const RamseyConfig& base) {
  std::vector<RobustnessPoint> out;
  out.reserve(counts.size());
  for (int n : counts) {
    RobustnessPoint pt;
    pt.pulse_count = n;
    RamseyConfig cfg = base;
    cfg.sequence = {family, n};
    cfg.run_index = base.run_index + static_cast<uint64_t>(n);
    try {
      const FringeResult f = run_ramsey(cfg);
      pt.contrast = f.contrast;
      pt.contrast_err = f.contrast_err;
      pt.p_at_phi0 = f.p1.empty() ? 0.0 : f.p1.front();  // grid starts at phi = 0
    } catch (const TimingError& e) {
      pt.ok = false;
      pt.error = e.what();
    }
    out.push_back(std::move(pt));
  }
  return out;
}

ConditionalShiftResult conditional_shift_ensemble(const RamseyConfig& base,
                                                  int n_runs) {
  if (n_runs < 1) throw std::invalid_argument("conditional_shift_ensemble: runs < 1");
  ConditionalShiftResult res;
  res.per_run_delta.reserve(n_runs);

  const int np = base.phase_points;
  std::vector<double> pooled0(np, 0.0), pooled1(np, 0.0), phases;
  for (int r = 0; r < n_runs; ++r) {
    RamseyConfig cfg = base;
    cfg.run_index = base.run_index + r;
    cfg.control_state = 0;
    const FringeResult f0 = run_ramsey(cfg);
    cfg.control_state = 1;
    const FringeResult f1 = run_ramsey(cfg);
    res.per_run_delta.push_back(wrap_to_pm_pi(f1.phi_min - f0.phi_min));
    if (phases.empty()) phases = f0.phase;
    for (int j = 0; j < np; ++j) {
      pooled0[j] += f0.p1[j];
      pooled1[j] += f1.p1[j];
    }
  }
  for (int j = 0; j < np; ++j) {
    pooled0[j] /= n_runs;
    pooled1[j] /= n_runs;
  }
  std::vector<double> zero(np, 0.0);
  res.pooled_control0 = fit_fringe(phases, pooled0, zero);
  res.pooled_control1 = fit_fringe(phases, pooled1, zero);
  res.pooled_delta =
      wrap_to_pm_pi(res.pooled_control1.phi_min - res.pooled_control0.phi_min);

  double acc = 0;
  for (double d : res.per_run_delta) acc += std::abs(d);
  res.mean_abs_delta = acc / n_runs;
  return res;
}

LockinPoint extra_phase_with_field(const RamseyConfig& base,
                                   const CoherentFieldModel& field) {
  RamseyConfig with = base;
  with.noise.coherent = field;
  RamseyConfig without = base;
  without.noise.coherent.reset();

  const FringeResult fw = run_ramsey(with);
  const FringeResult f0 = run_ramsey(without);
  LockinPoint pt;
  pt.pulse_count = base.sequence.count;
  pt.extra_phase = wrap_to_pm_pi(fw.phi_min - f0.phi_min);
  pt.ok = fw.reliable && f0.reliable;
  return pt;
}

std::vector<LockinPoint> pdd_lockin_study(const RamseyConfig& base,
                                          const CoherentFieldModel& field,
                                          std::span<const int> counts) {
  std::vector<LockinPoint> out;
  out.reserve(counts.size());
  for (int n : counts) {
    RamseyConfig cfg = base;
    cfg.sequence = {SequenceFamily::pdd_xy, n};
    cfg.run_index = base.run_index + static_cast<uint64_t>(n);
    out.push_back(extra_phase_with_field(cfg, field));
  }
  return out;
}

namespace {

// int y(t) v(t) dt for cell-constant samples v and the sign function flipping
// at the given switch times.
double toggled_cell_integral(std::span<const double> cells, double dt, double total,
                             std::span<const double> switch_times) {
  double acc = 0, t = 0, sign = 1;
  size_t isw = 0;
  const double eps = 1e-15 * std::max(1.0, total);
  while (t < total - eps) {
    while (isw < switch_times.size() && switch_times[isw] <= t + eps) {
      sign = -sign;
      ++isw;
    }
    const size_t cell = std::min(static_cast<size_t>(t / dt + 1e-9), cells.size() - 1);
    double next = std::min(total, (static_cast<double>(cell) + 1.0) * dt);
    if (isw < switch_times.size()) next = std::min(next, switch_times[isw]);
    if (next <= t + eps) {
      t += eps;
      continue;
    }
    acc += sign * cells[cell] * (next - t);
    t = next;
  }
  return acc;
}

}  // namespace

double toggled_field_integral(const Sequence& seq, const CoherentFieldModel& field,
                              double dt) {
  const std::vector<double> cells = coherent_field_cells(field, seq.total_time, dt);
  const ToggleFunction toggle = toggle_from_sequence(seq);
  return toggled_cell_integral(cells, dt, seq.total_time, toggle.switch_times);
}

DecayScan contrast_vs_time(const RamseyConfig& base, std::span<const double> t_list) {
  DecayScan scan;
  for (size_t i = 0; i < t_list.size(); ++i) {
    RamseyConfig cfg = base;
    cfg.total_time = t_list[i];
    cfg.run_index = base.run_index + i;
    const FringeResult f = run_ramsey(cfg);
    scan.total_time.push_back(t_list[i]);
    scan.contrast.push_back(f.contrast);
    scan.contrast_err.push_back(f.contrast_err);
  }
  const double target = std::exp(-1.0);
  for (size_t i = 0; i + 1 < scan.contrast.size(); ++i) {
    const double c0 = std::max(scan.contrast[i], 1e-6);
    const double c1 = std::max(scan.contrast[i + 1], 1e-6);
    if (c0 >= target && c1 < target) {
      const double l0 = std::log(c0), l1 = std::log(c1);
      scan.one_over_e_time =
          scan.total_time[i] + (scan.total_time[i + 1] - scan.total_time[i]) *
                                   (l0 + 1.0) / (l0 - l1);
      scan.crossed = true;
      break;
    }
  }
  return scan;
}

CoherenceEstimate mc_dephasing_coherence(const ToggleFunction& toggle,
                                         const FastNoiseModel& model, int n_traces,
                                         uint64_t seed, int threads) {
  if (n_traces < 2)
    throw std::invalid_argument("mc_dephasing_coherence: need >= 2 traces");
  const double T = toggle.total_time;
  std::vector<std::complex<double>> z(n_traces);
  parallel_for(n_traces, threads, [&](size_t m) {
    const NoiseTrace tr =
        sample_fast_trace(model, T, {seed, 0, static_cast<uint64_t>(m)}, true);
    const double phi =
        toggled_cell_integral(tr.delta2, tr.dt, T, toggle.switch_times);
    z[m] = std::exp(std::complex<double>(0.0, phi));
  });

  std::complex<double> zbar = 0;
  for (const auto& v : z) zbar += v;
  zbar /= static_cast<double>(n_traces);

  CoherenceEstimate est;
  est.mean = std::abs(zbar);
  const std::complex<double> dir = est.mean > 0 ? zbar / est.mean : 1.0;
  std::vector<double> proj(n_traces);
  for (int m = 0; m < n_traces; ++m) proj[m] = std::real(z[m] * std::conj(dir));
  est.stat_err = sample_std(proj) / std::sqrt(static_cast<double>(n_traces));
  return est;
}

}  // namespace ddsim
