#pragma once

// Fixed-step classical RK4 integration of the 24-ODE network with a timed
// event schedule (parameter switches, stimulations, perturbations, noise
// windows) and uniform trajectory sampling.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cpg8/envelope.hpp"
#include "cpg8/rng.hpp"
#include "cpg8/stein.hpp"

namespace cpg8 {

struct SimulationError : std::runtime_error {
  double time;
  explicit SimulationError(const std::string& what, double t)
      : std::runtime_error(what + " at t=" + std::to_string(t)), time(t) {}
};

// One classical RK4 step of dy/dt = f(t, y). Time-varying terms are sampled
// at the stage times t, t+dt/2, t+dt.
template <std::size_t N, typename F>
std::array<double, N> rk4_step(const std::array<double, N>& y, double t, double dt, F&& f) {
  std::array<double, N> k1 = f(t, y);
  std::array<double, N> tmp;
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
  std::array<double, N> k2 = f(t + 0.5 * dt, tmp);
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
  std::array<double, N> k3 = f(t + 0.5 * dt, tmp);
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + dt * k3[i];
  std::array<double, N> k4 = f(t + dt, tmp);
  std::array<double, N> out;
  for (std::size_t i = 0; i < N; ++i)
    out[i] = y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

using NeuronMask = std::array<bool, kNumNeurons>;

inline NeuronMask neuron_mask(std::initializer_list<int> indices) {
  NeuronMask m{};
  for (int i : indices) m[i] = true;
  return m;
}

inline NeuronMask top_layer_mask() { return neuron_mask({0, 1, 2, 3}); }

// Timed events. Offsets and noise apply to the membrane potential x only.
struct SetGaitParams {
  GaitParams params;
};
struct Stimulate {
  NeuronMask neurons{};
  StimulationEnvelope envelope;  // t0 is reset to the realized firing time
};
struct StateOffset {
  NeuronMask neurons{};
  double offset = 0.0;
};
struct RandomOffset {
  NeuronMask neurons{};
  double lo = 0.0, hi = 0.0;  // one draw per event, shared by the listed neurons
};
struct NoiseWindow {
  NeuronMask neurons{};
  double lo = 0.0, hi = 0.0;  // independent draw per neuron per step
  double t_end = 0.0;
};

struct Event {
  double time = 0.0;
  std::variant<SetGaitParams, Stimulate, StateOffset, RandomOffset, NoiseWindow> kind;
};

struct RealizedEvent {
  double scheduled = 0.0;
  double realized = 0.0;  // step boundary at or after the scheduled time
  std::string description;
  bool skipped = false;  // scheduled beyond the simulation end
};

struct Trajectory {
  double record_interval = 0.0;
  std::vector<NetworkState> samples;  // strictly increasing t, spaced record_interval
  std::vector<RealizedEvent> event_log;

  std::size_t size() const { return samples.size(); }
  double time(std::size_t k) const { return samples[k].t; }
  double x(std::size_t k, int neuron) const { return samples[k].neurons[neuron].x; }
  double t_begin() const { return samples.front().t; }
  double t_end() const { return samples.back().t; }

  // Linear interpolation of x_i(t); t must lie within the sampled range.
  double x_at(double t, int neuron) const {
    if (samples.empty() || t < t_begin() - 1e-12 || t > t_end() + 1e-12)
      throw std::out_of_range("time outside trajectory");
    const double rel = (t - t_begin()) / record_interval;
    const std::size_t k0 = std::min(static_cast<std::size_t>(std::max(0.0, std::floor(rel))),
                                    samples.size() - 1);
    const std::size_t k1 = std::min(k0 + 1, samples.size() - 1);
    if (k0 == k1) return x(k0, neuron);
    const double w = (t - time(k0)) / (time(k1) - time(k0));
    return (1.0 - w) * x(k0, neuron) + w * x(k1, neuron);
  }

  // Index of the first sample with time >= t.
  std::size_t index_at_or_after(double t) const {
    std::size_t lo = 0, hi = samples.size();
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      if (samples[mid].t < t - 1e-12)
        lo = mid + 1;
      else
        hi = mid;
    }
    return lo;
  }
};

enum class NoiseScaling {
  PerStep,    // x += U[lo,hi] at every step inside the window
  SqrtDtRef,  // draw scaled by sqrt(dt / 1e-4): diffusion matched to the default step
};

struct SimConfig {
  double dt = 1e-4;
  double record_interval = 1e-3;
  double duration = 15.0;
  NetworkState initial = standard_initial_state();
  GaitParams gait = gait_params(Gait::Walk);
  CouplingConfig coupling;
  NeuronConstants consts;
  std::vector<Event> events;
  std::uint64_t rng_seed = 0;
  NoiseScaling noise_scaling = NoiseScaling::PerStep;

  void validate() const {
    if (dt <= 0.0 || duration < 0.0) throw std::invalid_argument("dt and duration must be positive");
    const double ratio = record_interval / dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-6 || ratio < 1.0)
      throw std::invalid_argument("record_interval must be an integer multiple of dt");
  }
};

// Steps the network one dt at a time, firing due events at step boundaries
// and recording samples every record_interval. Copyable by value: a copy is
// an independent simulation that can be resumed, which is how transition
// sweeps clone a prepared steady state.
class Simulator {
 public:
  explicit Simulator(SimConfig cfg) : cfg_(std::move(cfg)), rng_(cfg_.rng_seed) {
    cfg_.validate();
    std::stable_sort(cfg_.events.begin(), cfg_.events.end(),
                     [](const Event& a, const Event& b) { return a.time < b.time; });
    state_ = cfg_.initial;
    gait_ = cfg_.gait;
    record_stride_ = static_cast<long>(std::llround(cfg_.record_interval / cfg_.dt));
    step_index_ = static_cast<long>(std::llround(state_.t / cfg_.dt));
    trajectory_.record_interval = cfg_.record_interval;
    fire_due_events();
    record_if_due();
  }

  double time() const { return state_.t; }
  double dt() const { return cfg_.dt; }
  const NetworkState& state() const { return state_; }
  const GaitParams& gait() const { return gait_; }
  const Trajectory& trajectory() const { return trajectory_; }
  Trajectory take_trajectory() { return std::move(trajectory_); }

  // Signed one-sided slope of x1 over the last step; 0 before any step.
  double x1_slope() const { return x1_slope_; }

  // Advance a single step: integrate dt, then fire events due at the new
  // boundary and record if it is a sampling instant.
  void step() {
    const double t = state_.t;
    apply_noise();
    StateVector y = pack_state(state_);
    const double x1_before = y[0];
    y = rk4_step(y, t, cfg_.dt, [this](double st, const StateVector& sy) {
      return network_derivative(unpack_state(sy, st), gait_, cfg_.coupling, multipliers(st),
                                cfg_.consts);
    });
    ++step_index_;
    state_ = unpack_state(y, step_index_ * cfg_.dt);
    x1_slope_ = state_.neurons[0].x - x1_before;
    check_finite();
    prune_envelopes();
    fire_due_events();
    record_if_due();
  }

  // Advance until time() >= t (to the step boundary at or after t).
  void run_until(double t) {
    while (state_.t < t - grid_eps()) step();
  }

  // Run the configured duration from the current time.
  void run() { run_until(cfg_.duration); }

  // Immediate interventions (logged with the current time).
  void set_gait(const GaitParams& p, const std::string& note = "set_gait") {
    gait_ = p;
    log_event(state_.t, state_.t, note);
  }

  void start_envelope(const NeuronMask& neurons, StimulationEnvelope env,
                      const std::string& note = "stimulate") {
    env.validate();
    env.t0 = state_.t;
    active_envelopes_.push_back({neurons, env});
    log_event(state_.t, state_.t, note);
  }

  void add_x_offset(const NeuronMask& neurons, double offset, const std::string& note = "offset") {
    for (int i = 0; i < kNumNeurons; ++i)
      if (neurons[i]) state_.neurons[i].x += offset;
    log_event(state_.t, state_.t, note);
  }

  // Drop recorded samples before t (frees memory in long batch runs).
  void drop_samples_before(double t) {
    auto& s = trajectory_.samples;
    std::size_t k = trajectory_.index_at_or_after(t);
    s.erase(s.begin(), s.begin() + k);
  }

  // Skip events that were scheduled beyond the end of a run;
  // called by simulate() at wrap-up.
  void mark_remaining_events_skipped() {
    for (; next_event_ < cfg_.events.size(); ++next_event_)
      log_skipped(cfg_.events[next_event_]);
  }

 private:
  struct ActiveEnvelope {
    NeuronMask neurons{};
    StimulationEnvelope env;
  };
  struct ActiveNoise {
    NeuronMask neurons{};
    double lo, hi, t_end;
    SplitMix64 rng;
  };

  StimMultipliers multipliers(double t) const {
    StimMultipliers m = kNoStimulation;
    for (const auto& a : active_envelopes_) {
      const double v = envelope_multiplier(a.env, t);
      for (int i = 0; i < kNumNeurons; ++i)
        if (a.neurons[i]) m[i] *= v;
    }
    return m;
  }

  void apply_noise() {
    if (active_noise_.empty()) return;
    const double scale = cfg_.noise_scaling == NoiseScaling::PerStep
                             ? 1.0
                             : std::sqrt(cfg_.dt / 1e-4);
    for (auto it = active_noise_.begin(); it != active_noise_.end();) {
      if (state_.t >= it->t_end - grid_eps()) {
        it = active_noise_.erase(it);
        continue;
      }
      for (int i = 0; i < kNumNeurons; ++i)
        if (it->neurons[i]) state_.neurons[i].x += scale * it->rng.uniform(it->lo, it->hi);
      ++it;
    }
  }

  void prune_envelopes() {
    std::erase_if(active_envelopes_,
                  [this](const ActiveEnvelope& a) { return a.env.expired(state_.t); });
  }

  // Fire at the first step boundary at or after the scheduled time. The
  // substream key is derived from the event itself (not its position in the
  // schedule), so inserting an event does not shift the draws of later ones.
  void fire_due_events() {
    while (next_event_ < cfg_.events.size() &&
           cfg_.events[next_event_].time <= state_.t + grid_eps()) {
      const Event& ev = cfg_.events[next_event_];
      SplitMix64 stream = rng_.substream(event_stream_key(ev));
      ++next_event_;
      fire(ev, stream);
    }
  }

  static std::uint64_t event_stream_key(const Event& ev) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(ev.time));
    std::memcpy(&bits, &ev.time, sizeof(bits));
    return bits * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(ev.kind.index());
  }

  double grid_eps() const { return 1e-6 * cfg_.dt; }

  void fire(const Event& ev, SplitMix64& stream) {
    const double t = state_.t;
    if (const auto* sg = std::get_if<SetGaitParams>(&ev.kind)) {
      gait_ = sg->params;
      log_event(ev.time, t, "set_gait");
    } else if (const auto* st = std::get_if<Stimulate>(&ev.kind)) {
      StimulationEnvelope env = st->envelope;
      env.validate();
      env.t0 = t;
      active_envelopes_.push_back({st->neurons, env});
      log_event(ev.time, t, "stimulate");
    } else if (const auto* so = std::get_if<StateOffset>(&ev.kind)) {
      for (int i = 0; i < kNumNeurons; ++i)
        if (so->neurons[i]) state_.neurons[i].x += so->offset;
      log_event(ev.time, t, "state_offset " + std::to_string(so->offset));
    } else if (const auto* ro = std::get_if<RandomOffset>(&ev.kind)) {
      const double draw = stream.uniform(ro->lo, ro->hi);
      for (int i = 0; i < kNumNeurons; ++i)
        if (ro->neurons[i]) state_.neurons[i].x += draw;
      log_event(ev.time, t, "random_offset " + std::to_string(draw));
    } else if (const auto* nw = std::get_if<NoiseWindow>(&ev.kind)) {
      if (nw->t_end <= ev.time) throw std::invalid_argument("noise window must end after it starts");
      active_noise_.push_back({nw->neurons, nw->lo, nw->hi, nw->t_end, stream});
      log_event(ev.time, t, "noise_window");
    }
  }

  void record_if_due() {
    if (step_index_ % record_stride_ == 0) trajectory_.samples.push_back(state_);
  }

  void check_finite() const {
    for (const auto& n : state_.neurons)
      if (!std::isfinite(n.x) || !std::isfinite(n.y) || !std::isfinite(n.z))
        throw SimulationError("integration diverged", state_.t);
  }

  void log_event(double scheduled, double realized, const std::string& desc) {
    trajectory_.event_log.push_back({scheduled, realized, desc, false});
  }

  void log_skipped(const Event& ev) {
    trajectory_.event_log.push_back({ev.time, ev.time, "skipped (beyond duration)", true});
  }

  SimConfig cfg_;
  SplitMix64 rng_;
  NetworkState state_;
  GaitParams gait_{};
  Trajectory trajectory_;
  std::vector<ActiveEnvelope> active_envelopes_;
  std::vector<ActiveNoise> active_noise_;
  std::size_t next_event_ = 0;
  long record_stride_ = 10;
  long step_index_ = 0;
  double x1_slope_ = 0.0;
};

// Integrate the configured duration and return the sampled trajectory.
inline Trajectory simulate(const SimConfig& config) {
  Simulator sim(config);
  sim.run();
  sim.mark_remaining_events_skipped();
  return sim.take_trajectory();
}

}  // namespace cpg8
