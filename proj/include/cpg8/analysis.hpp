#pragma once

// Rhythm analysis of sampled trajectories: period and pairwise phase
// estimation from mid-level threshold crossings, gait classification against
// the five phase templates, cycle-amplitude stability, and the monotonized
// phase coordinate F(x1).

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cpg8/integrator.hpp"
#include "cpg8/stein.hpp"

namespace cpg8 {

struct NotPeriodicError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Window {
  double begin = 0.0;
  double end = 0.0;
  double length() const { return end - begin; }
};

inline Window last_seconds(const Trajectory& traj, double seconds) {
  return {traj.t_end() - seconds, traj.t_end()};
}

// --- circular statistics on phases measured in cycles ---------------------

inline double wrap_cycle(double phase) {
  double w = std::fmod(phase, 1.0);
  return w < 0.0 ? w + 1.0 : w;
}

// distance on the circle, in [0, 0.5]
inline double circular_distance(double a, double b) {
  const double d = std::abs(wrap_cycle(a) - wrap_cycle(b));
  return std::min(d, 1.0 - d);
}

inline double circular_mean(const std::vector<double>& phases) {
  double s = 0.0, c = 0.0;
  for (double p : phases) {
    s += std::sin(2.0 * M_PI * p);
    c += std::cos(2.0 * M_PI * p);
  }
  return wrap_cycle(std::atan2(s, c) / (2.0 * M_PI));
}

inline double circular_std(const std::vector<double>& phases) {
  if (phases.size() < 2) return 0.0;
  double s = 0.0, c = 0.0;
  for (double p : phases) {
    s += std::sin(2.0 * M_PI * p);
    c += std::cos(2.0 * M_PI * p);
  }
  const double r = std::sqrt(s * s + c * c) / static_cast<double>(phases.size());
  if (r >= 1.0) return 0.0;
  return std::sqrt(-2.0 * std::log(r)) / (2.0 * M_PI);
}

// --- threshold crossings ---------------------------------------------------

// Upward crossings of the mid-level (midpoint of min/max over the window)
// with parabolic sub-sample refinement of each crossing instant. Spurious
// double-crossings from sample noise are removed by a minimum-spacing pass.
inline std::vector<double> upward_crossings(const Trajectory& traj, int neuron,
                                            const Window& win) {
  const std::size_t k0 = traj.index_at_or_after(win.begin);
  const std::size_t k1 = traj.index_at_or_after(win.end);
  if (k1 <= k0 + 2) throw NotPeriodicError("window too short");

  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t k = k0; k < k1; ++k) {
    lo = std::min(lo, traj.x(k, neuron));
    hi = std::max(hi, traj.x(k, neuron));
  }
  const double thr = 0.5 * (lo + hi);
  if (hi - lo < 1e-9) throw NotPeriodicError("signal is constant over window");

  auto value = [&](std::size_t k) { return traj.x(k, neuron) - thr; };

  std::vector<double> crossings;
  for (std::size_t k = k0; k + 1 < k1; ++k) {
    if (!(value(k) < 0.0 && value(k + 1) >= 0.0)) continue;
    const double tk = traj.time(k);
    const double h = traj.time(k + 1) - tk;
    const double linear = -value(k) / (value(k + 1) - value(k));  // in [0,1]

    // Parabola through the three samples nearest the crossing; fall back to
    // the linear estimate when the root leaves the bracket.
    double frac = linear;
    const bool use_left = std::abs(value(k)) <= std::abs(value(k + 1));
    const std::size_t c = use_left ? k : k + 1;
    if (c > k0 && c + 1 < k1) {
      const double ym = value(c - 1), y0 = value(c), yp = value(c + 1);
      const double a = 0.5 * (yp - 2.0 * y0 + ym);
      const double b = 0.5 * (yp - ym);
      // solve a u^2 + b u + y0 = 0, u relative to sample c
      const double disc = b * b - 4.0 * a * y0;
      if (std::abs(a) > 1e-14 && disc >= 0.0) {
        const double r1 = (-b + std::sqrt(disc)) / (2.0 * a);
        const double r2 = (-b - std::sqrt(disc)) / (2.0 * a);
        const double offset = use_left ? 0.0 : -1.0;  // bracket in u-coordinates
        for (double r : {r1, r2}) {
          const double f = r - offset;
          if (f >= -0.05 && f <= 1.05) {
            frac = std::clamp(f, 0.0, 1.0);
            break;
          }
        }
      } else if (std::abs(a) <= 1e-14 && std::abs(b) > 1e-14) {
        const double f = -y0 / b - (use_left ? 0.0 : -1.0);
        if (f >= -0.05 && f <= 1.05) frac = std::clamp(f, 0.0, 1.0);
      }
    }
    crossings.push_back(tk + frac * h);
  }

  if (crossings.size() >= 3) {
    std::vector<double> spacing;
    for (std::size_t k = 1; k < crossings.size(); ++k)
      spacing.push_back(crossings[k] - crossings[k - 1]);
    std::nth_element(spacing.begin(), spacing.begin() + spacing.size() / 2, spacing.end());
    const double median = spacing[spacing.size() / 2];
    std::vector<double> filtered{crossings.front()};
    for (std::size_t k = 1; k < crossings.size(); ++k)
      if (crossings[k] - filtered.back() > 0.5 * median) filtered.push_back(crossings[k]);
    crossings = std::move(filtered);
  }
  return crossings;
}

// Mean spacing of successive upward crossings. Requires at least 3 crossings.
inline double estimate_period(const Trajectory& traj, int neuron, const Window& win) {
  const auto c = upward_crossings(traj, neuron, win);
  if (c.size() < 3) throw NotPeriodicError("fewer than 3 threshold crossings");
  return (c.back() - c.front()) / static_cast<double>(c.size() - 1);
}

// Phase of neuron j relative to neuron i, in cycles: the tau in [0,1) such
// that x_j(t) ~ x_i(t + tau * period). Computed as the circular mean over j's
// crossings of (nearest i-crossing - j-crossing) / period.
inline double phase_difference(const Trajectory& traj, int i, int j, double period,
                               const Window& win) {
  if (i == j) return 0.0;
  const auto ci = upward_crossings(traj, i, win);
  const auto cj = upward_crossings(traj, j, win);
  if (ci.size() < 3 || cj.size() < 3) throw NotPeriodicError("fewer than 3 threshold crossings");
  std::vector<double> offsets;
  offsets.reserve(cj.size());
  for (double t : cj) {
    auto it = std::lower_bound(ci.begin(), ci.end(), t);
    double nearest;
    if (it == ci.begin())
      nearest = *it;
    else if (it == ci.end())
      nearest = ci.back();
    else
      nearest = (*it - t < t - *(it - 1)) ? *it : *(it - 1);
    offsets.push_back(wrap_cycle((nearest - t) / period));
  }
  return circular_mean(offsets);
}

// One phase estimate per cycle of neuron j; used for phase-locking spread.
inline std::vector<double> per_cycle_phases(const Trajectory& traj, int i, int j, double period,
                                            const Window& win) {
  const auto ci = upward_crossings(traj, i, win);
  const auto cj = upward_crossings(traj, j, win);
  if (ci.size() < 3 || cj.size() < 3) throw NotPeriodicError("fewer than 3 threshold crossings");
  std::vector<double> out;
  for (double t : cj) {
    auto it = std::lower_bound(ci.begin(), ci.end(), t);
    double nearest;
    if (it == ci.begin())
      nearest = *it;
    else if (it == ci.end())
      nearest = ci.back();
    else
      nearest = (*it - t < t - *(it - 1)) ? *it : *(it - 1);
    out.push_back(wrap_cycle((nearest - t) / period));
  }
  return out;
}

// Coefficient of variation of per-cycle peak amplitudes of x_neuron.
inline double amplitude_cv(const Trajectory& traj, int neuron, const Window& win) {
  const auto c = upward_crossings(traj, neuron, win);
  if (c.size() < 3) throw NotPeriodicError("fewer than 3 threshold crossings");
  std::vector<double> peaks;
  for (std::size_t k = 0; k + 1 < c.size(); ++k) {
    double peak = -std::numeric_limits<double>::infinity();
    const std::size_t a = traj.index_at_or_after(c[k]);
    const std::size_t b = traj.index_at_or_after(c[k + 1]);
    for (std::size_t s = a; s < b && s < traj.size(); ++s)
      peak = std::max(peak, traj.x(s, neuron));
    if (std::isfinite(peak)) peaks.push_back(peak);
  }
  if (peaks.size() < 2) throw NotPeriodicError("too few cycles for amplitude statistics");
  const double mean = std::accumulate(peaks.begin(), peaks.end(), 0.0) / peaks.size();
  double var = 0.0;
  for (double p : peaks) var += (p - mean) * (p - mean);
  var /= static_cast<double>(peaks.size() - 1);
  return std::sqrt(var) / std::abs(mean);
}

// --- classification ----------------------------------------------------------

enum class RhythmKind { Walk, Trot, Pace, Bound, Pronk, Invalid, Unstable, Unclassified };

struct RhythmLabel {
  RhythmKind kind = RhythmKind::Unclassified;
  std::vector<std::vector<int>> partition;  // 0-based hip blocks, for Invalid
  std::vector<double> block_phases;         // phase of each block relative to the first

  bool is_gait() const {
    return kind == RhythmKind::Walk || kind == RhythmKind::Trot || kind == RhythmKind::Pace ||
           kind == RhythmKind::Bound || kind == RhythmKind::Pronk;
  }
  bool matches(Gait g) const {
    switch (g) {
      case Gait::Walk: return kind == RhythmKind::Walk;
      case Gait::Trot: return kind == RhythmKind::Trot;
      case Gait::Pace: return kind == RhythmKind::Pace;
      case Gait::Bound: return kind == RhythmKind::Bound;
      case Gait::Pronk: return kind == RhythmKind::Pronk;
    }
    return false;
  }
  bool operator==(const RhythmLabel& o) const {
    if (kind != o.kind) return false;
    return kind != RhythmKind::Invalid || partition == o.partition;
  }
};

inline std::string to_string(const RhythmLabel& label) {
  switch (label.kind) {
    case RhythmKind::Walk: return "walk";
    case RhythmKind::Trot: return "trot";
    case RhythmKind::Pace: return "pace";
    case RhythmKind::Bound: return "bound";
    case RhythmKind::Pronk: return "pronk";
    case RhythmKind::Unstable: return "unstable";
    case RhythmKind::Unclassified: return "unclassified";
    case RhythmKind::Invalid: {
      std::string s = "invalid ";
      for (const auto& block : label.partition) {
        s += '(';
        for (int n : block) s += static_cast<char>('1' + n);
        s += ')';
      }
      return s;
    }
  }
  return "?";
}

struct RhythmReport {
  RhythmLabel label;
  double period = std::numeric_limits<double>::quiet_NaN();
  // phase[i][j]: phase of neuron j relative to neuron i (NaN when undefined)
  std::array<std::array<double, kNumNeurons>, kNumNeurons> phase{};
  std::array<double, 4> hip_knee_phases{};  // phase(i, i+4), i = 0..3
  std::array<double, kNumNeurons> amplitude_cv{};
};

struct ClassifyOptions {
  double cluster_threshold = 0.1;  // in-phase clustering, cycles
  double unstable_cv = 0.08;       // cycle-amplitude CV above which a rhythm is unstable
};

namespace detail {

// Expected hip phases relative to neuron 1 (index 0): walk rotates through
// quarter phases in ring order 1,3,2,4; the two-block gaits sit at half phase.
inline const std::array<std::array<double, 4>, 5>& gait_phase_templates() {
  static const std::array<std::array<double, 4>, 5> t = {{
      {0.0, 0.5, 0.25, 0.75},  // walk
      {0.0, 0.5, 0.0, 0.5},    // trot (13)(24)
      {0.0, 0.5, 0.5, 0.0},    // pace (14)(23)
      {0.0, 0.0, 0.5, 0.5},    // bound (12)(34)
      {0.0, 0.0, 0.0, 0.0},    // pronk (1234)
  }};
  return t;
}

inline std::vector<std::vector<int>> normalize_partition(std::vector<std::vector<int>> blocks) {
  for (auto& b : blocks) std::sort(b.begin(), b.end());
  std::sort(blocks.begin(), blocks.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a.front() < b.front();
  });
  return blocks;
}

inline std::vector<std::vector<int>> partition_for_gait(Gait g) {
  switch (g) {
    case Gait::Walk: return {{0}, {1}, {2}, {3}};
    case Gait::Trot: return {{0, 2}, {1, 3}};
    case Gait::Pace: return {{0, 3}, {1, 2}};
    case Gait::Bound: return {{0, 1}, {2, 3}};
    case Gait::Pronk: return {{0, 1, 2, 3}};
  }
  return {};
}

}  // namespace detail

// Phase template of each gait relative to neuron 1: (x1, x2, x3, x4).
inline std::array<double, 4> gait_phase_template(Gait g) {
  return detail::gait_phase_templates()[static_cast<int>(g)];
}

// Classify a steady-state window: estimate the period on neuron 1, cluster
// the hip neurons into in-phase blocks, match against the five gait
// templates, and flag unstable rhythms by cycle-amplitude variation.
inline RhythmReport classify(const Trajectory& traj, const Window& win,
                             const ClassifyOptions& opts = {}) {
  RhythmReport report;
  for (auto& row : report.phase) row.fill(std::numeric_limits<double>::quiet_NaN());
  for (int i = 0; i < kNumNeurons; ++i) report.phase[i][i] = 0.0;
  report.hip_knee_phases.fill(std::numeric_limits<double>::quiet_NaN());
  report.amplitude_cv.fill(std::numeric_limits<double>::quiet_NaN());

  double period;
  try {
    period = estimate_period(traj, 0, win);
  } catch (const NotPeriodicError&) {
    report.label.kind = RhythmKind::Unclassified;
    return report;
  }
  report.period = period;

  // Pairwise phases (full matrix; hips are required, knees best-effort).
  std::array<bool, kNumNeurons> periodic{};
  for (int i = 0; i < kNumNeurons; ++i) {
    try {
      report.amplitude_cv[i] = amplitude_cv(traj, i, win);
      periodic[i] = true;
    } catch (const NotPeriodicError&) {
      periodic[i] = false;
    }
  }
  for (int i = 0; i < kNumNeurons; ++i)
    for (int j = i + 1; j < kNumNeurons; ++j) {
      if (!periodic[i] || !periodic[j]) continue;
      try {
        const double p = phase_difference(traj, i, j, period, win);
        report.phase[i][j] = p;
        report.phase[j][i] = wrap_cycle(-p);
      } catch (const NotPeriodicError&) {
      }
    }
  for (int i = 0; i < 4; ++i) report.hip_knee_phases[i] = report.phase[i][i + 4];

  for (int i = 0; i < 4; ++i)
    if (!periodic[i]) {
      report.label.kind = RhythmKind::Unclassified;
      return report;
    }

  // In-phase blocks over the hip neurons (union-find, threshold 0.1 cycles).
  std::array<int, 4> parent = {0, 1, 2, 3};
  auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (circular_distance(report.phase[i][j], 0.0) < opts.cluster_threshold)
        parent[find(j)] = find(i);
  std::vector<std::vector<int>> blocks;
  for (int root = 0; root < 4; ++root) {
    if (find(root) != root) continue;
    std::vector<int> b;
    for (int v = 0; v < 4; ++v)
      if (find(v) == root) b.push_back(v);
    blocks.push_back(std::move(b));
  }
  blocks = detail::normalize_partition(std::move(blocks));

  bool unstable = false;
  for (int i = 0; i < 4; ++i)
    if (report.amplitude_cv[i] > opts.unstable_cv) unstable = true;
  if (unstable) {
    report.label.kind = RhythmKind::Unstable;
    report.label.partition = blocks;
    return report;
  }

  for (Gait g : kAllGaits) {
    if (blocks != detail::normalize_partition(detail::partition_for_gait(g))) continue;
    const auto& tmpl = gait_phase_template(g);
    bool match = true;
    for (int j = 1; j < 4; ++j)
      if (circular_distance(report.phase[0][j], tmpl[j]) >= opts.cluster_threshold) match = false;
    if (match) {
      switch (g) {
        case Gait::Walk: report.label.kind = RhythmKind::Walk; break;
        case Gait::Trot: report.label.kind = RhythmKind::Trot; break;
        case Gait::Pace: report.label.kind = RhythmKind::Pace; break;
        case Gait::Bound: report.label.kind = RhythmKind::Bound; break;
        case Gait::Pronk: report.label.kind = RhythmKind::Pronk; break;
      }
      report.label.partition = blocks;
      return report;
    }
  }

  report.label.kind = RhythmKind::Invalid;
  report.label.partition = blocks;
  for (const auto& b : blocks)
    report.label.block_phases.push_back(report.phase[blocks.front().front()][b.front()]);
  return report;
}

// --- monotonized phase coordinate F(x1) --------------------------------------

// F = x1 on rising segments and 2 - x1 on falling ones (centered finite
// difference). Piecewise increasing within a cycle; wraps near the trough.
inline std::vector<std::pair<double, double>> monotonize_F(const Trajectory& traj,
                                                           const Window& win, int neuron = 0) {
  const std::size_t k0 = traj.index_at_or_after(win.begin);
  const std::size_t k1 = traj.index_at_or_after(win.end);
  if (k1 <= k0 + 2) throw std::invalid_argument("window too short to monotonize");
  std::vector<std::pair<double, double>> out;
  out.reserve(k1 - k0);
  for (std::size_t k = k0; k < k1; ++k) {
    const std::size_t km = k > 0 ? k - 1 : k;
    const std::size_t kp = k + 1 < traj.size() ? k + 1 : k;
    const double slope = traj.x(kp, neuron) - traj.x(km, neuron);
    const double x = traj.x(k, neuron);
    out.emplace_back(traj.time(k), slope >= 0.0 ? x : 2.0 - x);
  }
  return out;
}

// Instantaneous F from a state and a one-sided slope of x1 (the causal form
// used by wait strategies while a simulation is running).
inline double online_F(double x1, double slope) { return slope >= 0.0 ? x1 : 2.0 - x1; }

// --- integrator step-size guard ----------------------------------------------

struct ConvergenceReport {
  double period_dt = 0.0;
  double period_half_dt = 0.0;
  double relative_change = 0.0;
  bool diverged = false;
  bool passed = false;
};

// Integrate at dt and dt/2 and compare measured periods; passes when the
// relative change is below 0.1%.
inline ConvergenceReport convergence_check(const SimConfig& config, int neuron = 0,
                                           double window_seconds = 5.0) {
  ConvergenceReport r;
  SimConfig half = config;
  half.dt = config.dt / 2.0;
  try {
    const Trajectory a = simulate(config);
    const Trajectory b = simulate(half);
    r.period_dt = estimate_period(a, neuron, last_seconds(a, window_seconds));
    r.period_half_dt = estimate_period(b, neuron, last_seconds(b, window_seconds));
    r.relative_change = std::abs(r.period_dt - r.period_half_dt) / r.period_half_dt;
    r.passed = r.relative_change < 1e-3;
  } catch (const SimulationError&) {
    r.diverged = true;
    r.passed = false;
  } catch (const NotPeriodicError&) {
    r.passed = false;
  }
  return r;
}

}  // namespace cpg8
