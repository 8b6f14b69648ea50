#include "ddsim/sequences.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "ddsim/errors.hpp"

namespace ddsim {

std::string to_string(SequenceFamily f) {
  switch (f) {
    case SequenceFamily::empty: return "empty";
    case SequenceFamily::cpmg_yy: return "cpmg_yy";
    case SequenceFamily::cpmg_xy: return "cpmg_xy";
    case SequenceFamily::pdd_xy: return "pdd_xy";
    case SequenceFamily::ccpmg: return "ccpmg";
    case SequenceFamily::custom: return "custom";
  }
  return "custom";
}

SequenceFamily family_from_string(std::string_view s) {
  if (s == "empty" || s == "none") return SequenceFamily::empty;
  if (s == "cpmg_yy") return SequenceFamily::cpmg_yy;
  if (s == "cpmg_xy") return SequenceFamily::cpmg_xy;
  if (s == "pdd_xy") return SequenceFamily::pdd_xy;
  if (s == "ccpmg") return SequenceFamily::ccpmg;
  if (s == "custom") return SequenceFamily::custom;
  throw ConfigError("unknown sequence family: " + std::string(s));
}

namespace {

Sequence empty_sequence(double total_time, TargetSet targets) {
  Sequence s;
  s.family = SequenceFamily::empty;
  s.total_time = total_time;
  s.base_interval = total_time;
  s.targets = targets;
  return s;
}

PulseEvent make_pulse(double start, double t_pi, double phase, double angle,
                      TargetSet targets) {
  PulseEvent p;
  p.center_time = start + 0.5 * t_pi;
  p.duration = t_pi;
  p.phase = phase;
  p.angle = angle;
  p.targets = targets;
  return p;
}

}  // namespace

Sequence build_cpmg(int n_pulses, double total_time, double t_pi,
                    SequenceFamily phase_mode, TargetSet targets) {
  if (phase_mode != SequenceFamily::cpmg_yy && phase_mode != SequenceFamily::cpmg_xy)
    throw std::invalid_argument("build_cpmg: phase_mode must be cpmg_yy or cpmg_xy");
  if (n_pulses < 0) throw std::invalid_argument("build_cpmg: negative pulse count");
  if (t_pi < 0) throw std::invalid_argument("build_cpmg: negative pulse duration");
  if (n_pulses == 0) return empty_sequence(total_time, targets);
  if (phase_mode == SequenceFamily::cpmg_xy && n_pulses % 2 != 0)
    throw std::invalid_argument("build_cpmg: xy mode needs an even pulse count");

  const double tau = (total_time - n_pulses * t_pi) / (2.0 * n_pulses);
  if (tau <= 0)
    throw TimingError("build_cpmg: window too short for " + std::to_string(n_pulses) +
                      " pulses");

  Sequence s;
  s.family = phase_mode;
  s.total_time = total_time;
  s.base_interval = tau;
  s.targets = targets;
  s.pulses.reserve(n_pulses);
  for (int k = 0; k < n_pulses; ++k) {
    const double start = tau + k * (2.0 * tau + t_pi);
    const bool is_y = (phase_mode == SequenceFamily::cpmg_yy) || (k % 2 == 0);
    s.pulses.push_back(make_pulse(start, t_pi, is_y ? y_phase : xbar_phase,
                                  is_y ? y_angle : xbar_angle, targets));
  }
  return s;
}

Sequence build_pdd(int n_pulses, double total_time, double t_pi, TargetSet targets) {
  if (n_pulses < 1) throw std::invalid_argument("build_pdd: need at least one pulse");
  if (t_pi < 0) throw std::invalid_argument("build_pdd: negative pulse duration");
  const double tau = (total_time - n_pulses * t_pi) / (n_pulses + 1.0);
  if (tau <= 0)
    throw TimingError("build_pdd: window too short for " + std::to_string(n_pulses) +
                      " pulses");

  Sequence s;
  s.family = SequenceFamily::pdd_xy;
  s.total_time = total_time;
  s.base_interval = tau;
  s.targets = targets;
  s.pulses.reserve(n_pulses);
  for (int k = 0; k < n_pulses; ++k) {
    const double start = (k + 1) * tau + k * t_pi;
    const bool is_xbar = (k % 2 == 0);
    s.pulses.push_back(make_pulse(start, t_pi, is_xbar ? xbar_phase : y_phase,
                                  is_xbar ? xbar_angle : y_angle, targets));
  }
  return s;
}

int FlatSequence::total_gap_units() const {
  int total = trailing_gap_units;
  for (const auto& p : pulses) total += p.gap_units_before;
  return total;
}

namespace {

void walk(const SequenceSymbol& node, FlatSequence& out, int& pending_gap) {
  switch (node.kind) {
    case SequenceSymbol::Kind::delay:
      ++pending_gap;
      ++out.delay_token_count;
      break;
    case SequenceSymbol::Kind::pulse:
      out.pulses.push_back({node.phase, node.angle, pending_gap});
      pending_gap = 0;
      break;
    case SequenceSymbol::Kind::block:
      for (int r = 0; r < node.repeat; ++r)
        for (const auto& child : node.children) walk(child, out, pending_gap);
      break;
  }
}

}  // namespace

FlatSequence flatten(const SequenceSymbol& root) {
  FlatSequence out;
  int pending = 0;
  walk(root, out, pending);
  out.trailing_gap_units = pending;
  return out;
}

long ccpmg_pulse_count(int level) {
  if (level < 1) throw std::invalid_argument("ccpmg_pulse_count: level must be >= 1");
  long p = 4;  // 4^(level+1)
  for (int i = 0; i < level; ++i) p *= 4;
  return (p - 4) / 3;
}

SequenceSymbol expand_ccpmg(int level) {
  if (level < 1) throw std::invalid_argument("expand_ccpmg: level must be >= 1");
  if (level > 10) throw std::invalid_argument("expand_ccpmg: level too deep");

  using S = SequenceSymbol;
  // bracketed content of level 1: tau Y tau tau Xbar tau
  std::vector<S> content = {S::tau(),  S::pulse(y_phase, y_angle),       S::tau(),
                            S::tau(),  S::pulse(xbar_phase, xbar_angle), S::tau()};
  for (int n = 2; n <= level; ++n) {
    S half = S::block(content, 1);   // single repetition of the previous bracket
    S full = S::block(content, 2);   // the previous level itself
    content = {half,
               S::tau(),
               S::pulse(y_phase, y_angle),
               S::tau(),
               full,
               S::tau(),
               S::pulse(xbar_phase, xbar_angle),
               S::tau(),
               half};
  }
  return S::block(std::move(content), 2);
}

Sequence schedule_ccpmg(int level, double total_time, double t_pi, TargetSet targets) {
  if (t_pi < 0) throw std::invalid_argument("schedule_ccpmg: negative pulse duration");
  const FlatSequence flat = flatten(expand_ccpmg(level));
  const long n = static_cast<long>(flat.pulses.size());
  const double tau = (total_time - n * t_pi) / (2.0 * n);
  if (tau <= 0)
    throw TimingError("schedule_ccpmg: window too short for level " +
                      std::to_string(level) + " (" + std::to_string(n) + " pulses)");

  Sequence s;
  s.family = SequenceFamily::ccpmg;
  s.level = level;
  s.total_time = total_time;
  s.base_interval = tau;
  s.targets = targets;
  s.pulses.reserve(flat.pulses.size());
  double cursor = 0;
  for (const auto& fp : flat.pulses) {
    cursor += fp.gap_units_before * tau;
    s.pulses.push_back(make_pulse(cursor, t_pi, fp.phase, fp.angle, targets));
    cursor += t_pi;
  }
  return s;
}

const SequenceDiagnostics::Check* SequenceDiagnostics::find(std::string_view name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

namespace {

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

SequenceDiagnostics validate(const Sequence& seq) {
  SequenceDiagnostics d;
  const double tol = 1e-12 * std::max(1.0, seq.total_time);
  auto add = [&d](std::string name, bool pass, std::string detail = "") {
    d.checks.push_back({std::move(name), pass, std::move(detail)});
  };

  bool ordered = true;
  for (size_t i = 1; i < seq.pulses.size(); ++i)
    if (!(seq.pulses[i].center_time > seq.pulses[i - 1].center_time)) ordered = false;
  add("ordering", ordered, ordered ? "" : "pulse centers not strictly increasing");

  bool overlap_free = true;
  for (size_t i = 1; i < seq.pulses.size(); ++i)
    if (seq.pulses[i].start() < seq.pulses[i - 1].end() - tol) overlap_free = false;
  add("overlap", overlap_free, overlap_free ? "" : "adjacent pulses overlap");

  bool inside = true;
  for (const auto& p : seq.pulses)
    if (p.start() < -tol || p.end() > seq.total_time + tol) inside = false;
  add("window", inside, inside ? "" : "pulse extends outside [0, T]");

  // free gaps + drive time must account for the whole window
  double gap_sum = 0, drive_sum = 0, prev_end = 0;
  for (const auto& p : seq.pulses) {
    gap_sum += p.start() - prev_end;
    drive_sum += p.duration;
    prev_end = p.end();
  }
  gap_sum += seq.total_time - prev_end;
  add("duration_sum", std::abs(gap_sum + drive_sum - seq.total_time) <= tol);

  const bool cpmg_timed = seq.family == SequenceFamily::cpmg_yy ||
                          seq.family == SequenceFamily::cpmg_xy ||
                          seq.family == SequenceFamily::ccpmg;
  if ((cpmg_timed || seq.family == SequenceFamily::pdd_xy) && ordered && inside &&
      !seq.pulses.empty()) {
    std::vector<double> gaps;
    prev_end = 0;
    for (const auto& p : seq.pulses) {
      gaps.push_back(p.start() - prev_end);
      prev_end = p.end();
    }
    gaps.push_back(seq.total_time - prev_end);

    bool timing_ok = true;
    const double tau = seq.base_interval;
    for (size_t i = 0; i < gaps.size(); ++i) {
      double expect = tau;
      if (cpmg_timed && i != 0 && i + 1 != gaps.size()) expect = 2.0 * tau;
      if (std::abs(gaps[i] - expect) > tol) timing_ok = false;
    }
    add("timing", timing_ok,
        timing_ok ? "" : "free gaps do not match the family pattern");

    bool alphabet_ok = true;
    for (const auto& p : seq.pulses) {
      const bool phase_ok = std::abs(p.phase - y_phase) <= 1e-12 ||
                            std::abs(p.phase - xbar_phase) <= 1e-12;
      const bool angle_ok = std::abs(std::abs(p.angle) - pi) <= 1e-12;
      if (!phase_ok || !angle_ok) alphabet_ok = false;
    }
    add("phase_alphabet", alphabet_ok);
  }

  if (seq.family == SequenceFamily::ccpmg) {
    const long expect = ccpmg_pulse_count(seq.level);
    const bool count_ok = seq.pulse_count() == expect;
    add("pulse_count", count_ok,
        count_ok ? "" : "expected " + std::to_string(expect) + " pulses, have " +
                            std::to_string(seq.pulse_count()));
  }
  return d;
}

std::string serialize_sequence(const Sequence& seq) {
  std::ostringstream os;
  os << "# ddsim sequence v1\n";
  os << "family " << to_string(seq.family) << "\n";
  os << "level " << seq.level << "\n";
  const char* tgt = seq.targets.qubit1 ? (seq.targets.qubit2 ? "12" : "1")
                                       : (seq.targets.qubit2 ? "2" : "0");
  os << "targets " << tgt << "\n";
  os << "total_time_s " << fmt_g(seq.total_time) << "\n";
  os << "base_interval_s " << fmt_g(seq.base_interval) << "\n";
  os << "pulse_count " << seq.pulses.size() << "\n";
  os << "# center_time_s duration_s phase_rad angle_rad targets\n";
  for (const auto& p : seq.pulses) {
    const char* pt = p.targets.qubit1 ? (p.targets.qubit2 ? "12" : "1")
                                      : (p.targets.qubit2 ? "2" : "0");
    os << fmt_g(p.center_time) << " " << fmt_g(p.duration) << " " << fmt_g(p.phase)
       << " " << fmt_g(p.angle) << " " << pt << "\n";
  }
  return os.str();
}

namespace {

TargetSet targets_from_token(const std::string& t) {
  if (t == "12" || t == "21") return TargetSet::both();
  if (t == "1") return TargetSet::control_only();
  if (t == "2") return TargetSet::target_only();
  if (t == "0") return {false, false};
  throw ConfigError("sequence: bad targets token '" + t + "'");
}

}  // namespace

Sequence parse_sequence(std::string_view text) {
  std::istringstream is{std::string(text)};
  Sequence seq;
  std::string line;
  long pulse_count = -1;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "family") {
      std::string v;
      ls >> v;
      seq.family = family_from_string(v);
    } else if (key == "level") {
      ls >> seq.level;
    } else if (key == "targets") {
      std::string v;
      ls >> v;
      seq.targets = targets_from_token(v);
    } else if (key == "total_time_s") {
      ls >> seq.total_time;
    } else if (key == "base_interval_s") {
      ls >> seq.base_interval;
    } else if (key == "pulse_count") {
      ls >> pulse_count;
      break;
    } else {
      throw ConfigError("sequence: unknown header key '" + key + "'");
    }
  }
  if (pulse_count < 0) throw ConfigError("sequence: missing pulse_count");
  while (static_cast<long>(seq.pulses.size()) < pulse_count && std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    PulseEvent p;
    std::string tgt;
    if (!(ls >> p.center_time >> p.duration >> p.phase >> p.angle >> tgt))
      throw ConfigError("sequence: malformed pulse record '" + line + "'");
    p.targets = targets_from_token(tgt);
    seq.pulses.push_back(p);
  }
  if (static_cast<long>(seq.pulses.size()) != pulse_count)
    throw ConfigError("sequence: truncated pulse list");
  return seq;
}

}  // namespace ddsim
