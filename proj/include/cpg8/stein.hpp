#pragma once

// Eight-neuron Stein-model network for quadruped hip-knee control.
//
// Neurons 1-4 (indices 0-3 here) form the top (hip) layer, neurons 5-8
// (indices 4-7) the bottom (knee) layer. Neuron pairs (1,5), (2,6), (3,7),
// (4,8) drive the left hind, right hind, right front and left front legs.
// Each neuron is a three-variable Stein model; coupling enters through the
// driving signal only.

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace cpg8 {

inline constexpr int kNumNeurons = 8;
inline constexpr int kStateDim = 3 * kNumNeurons;

struct NeuronState {
  double x = 0.0;  // membrane potential
  double y = 0.0;  // adaptation variable (slow)
  double z = 0.0;  // adaptation variable (slower)
};

struct NetworkState {
  std::array<NeuronState, kNumNeurons> neurons{};
  double t = 0.0;  // seconds
};

struct NeuronConstants {
  double b = -2000.0;  // self-adaptation constant
  double p = 10.0;     // rate constant of y
  double q = 30.0;     // rate constant of z
};

// Coupling gains and the 8x8 topology matrix. lambda[j][i] == 1 means neuron j
// couples into neuron i (sources are rows, targets are columns).
struct CouplingConfig {
  double alpha = -0.15;  // top-layer ring
  double beta = -0.15;   // bottom-layer ring
  double gamma = -0.6;   // top -> bottom
  double delta = -0.1;   // bottom -> top
  std::array<std::array<int, kNumNeurons>, kNumNeurons> lambda = default_lambda();

  // Top ring 4->1->3->2->4, bottom ring 7->5->8->6->7 (1-based), plus the
  // hip<->knee pair couplings i <-> i+4.
  static constexpr std::array<std::array<int, kNumNeurons>, kNumNeurons> default_lambda() {
    std::array<std::array<int, kNumNeurons>, kNumNeurons> m{};
    constexpr int targets[kNumNeurons][2] = {
        {2, 4}, {3, 5}, {1, 6}, {0, 7},  // rows 1-4: same-layer ring + own knee
        {0, 7}, {1, 6}, {2, 4}, {3, 5},  // rows 5-8: same-layer ring + own hip
    };
    for (int j = 0; j < kNumNeurons; ++j)
      for (int t : targets[j]) m[j][t] = 1;
    return m;
  }
};

// Per-layer control variables; one instance defines one gait.
struct GaitParams {
  double a_h, f_h, k1_h, k2_h;  // top layer: rate, amplitude, drive amplitude, drive frequency (rad/s)
  double a_k, f_k, k1_k, k2_k;  // bottom layer
};

enum class Gait { Walk, Trot, Pace, Bound, Pronk };

inline constexpr std::array<Gait, 5> kAllGaits = {Gait::Walk, Gait::Trot, Gait::Pace,
                                                  Gait::Bound, Gait::Pronk};

inline const char* gait_name(Gait g) {
  switch (g) {
    case Gait::Walk: return "walk";
    case Gait::Trot: return "trot";
    case Gait::Pace: return "pace";
    case Gait::Bound: return "bound";
    case Gait::Pronk: return "pronk";
  }
  return "?";
}

inline Gait gait_from_name(const std::string& name) {
  for (Gait g : kAllGaits)
    if (name == gait_name(g)) return g;
  throw std::invalid_argument("unknown gait: " + name);
}

inline GaitParams gait_params(Gait g) {
  switch (g) {
    case Gait::Walk:  return {10, 40, 0.0,   0, 10, 40, 0.0,  0};
    case Gait::Trot:  return {11, 41, 0.085, 56, 11, 41, 0.0, 0};
    case Gait::Pace:  return {11, 41, 0.04,  54, 11, 41, 0.01, 54};
    case Gait::Bound: return {16, 50, 0.1,   59, 14, 45, 0.0, 0};
    case Gait::Pronk: return {22, 65, 0.3,   60, 22, 65, 0.2, 60};
  }
  throw std::invalid_argument("bad gait");
}

// Reference steady-state period of each gait, seconds.
inline double gait_reference_period(Gait g) {
  switch (g) {
    case Gait::Walk: return 0.259;
    case Gait::Trot: return 0.224;
    case Gait::Pace: return 0.233;
    case Gait::Bound: return 0.213;
    case Gait::Pronk: return 0.209;
  }
  throw std::invalid_argument("bad gait");
}

// Standard initial network state; every experiment starts here unless
// explicitly overridden.
inline NetworkState standard_initial_state() {
  NetworkState s;
  s.neurons = {{
      {1.0, 0.040, 0.016},   // 1
      {1.0, 0.045, 0.018},   // 2
      {0.8, 0.050, 0.020},   // 3
      {1.0, 0.025, 0.014},   // 4
      {1.0, 0.045, 0.018},   // 5
      {0.8, 0.050, 0.020},   // 6
      {1.0, 0.025, 0.014},   // 7
      {1.0, 0.040, 0.016},   // 8
  }};
  s.t = 0.0;
  return s;
}

// Logistic sigmoid with the exponent clamped to +-700 so that b*y terms
// (magnitudes up to a few hundred at model scale) can never overflow exp().
inline double saturating_sigmoid(double arg) {
  if (arg > 700.0) return 0.0;   // exp(arg) huge -> sigmoid 0
  if (arg < -700.0) return 1.0;  // exp(arg) tiny -> sigmoid 1
  return 1.0 / (1.0 + std::exp(arg));
}

// Driving signal f_ci for neuron i (0-based). stim_multiplier scales the
// leading amplitude parameter of this neuron (>= 1; 1 when unstimulated).
inline double driving_signal(int i, const NetworkState& state, const GaitParams& gait,
                             const CouplingConfig& coupling, double stim_multiplier = 1.0) {
  if (i < 0 || i >= kNumNeurons) throw std::out_of_range("neuron index");
  const bool top = i < 4;
  const double f = top ? gait.f_h : gait.f_k;
  const double k1 = top ? gait.k1_h : gait.k1_k;
  const double k2 = top ? gait.k2_h : gait.k2_k;
  const double same_gain = top ? coupling.alpha : coupling.beta;
  const double cross_gain = top ? coupling.delta : coupling.gamma;

  double same = 0.0, cross = 0.0;
  for (int j = 0; j < 4; ++j) {
    const int top_j = j;
    const int bot_j = j + 4;
    if (top) {
      if (coupling.lambda[top_j][i]) same += state.neurons[top_j].x;
      if (coupling.lambda[bot_j][i]) cross += state.neurons[bot_j].x;
    } else {
      if (coupling.lambda[bot_j][i]) same += state.neurons[bot_j].x;
      if (coupling.lambda[top_j][i]) cross += state.neurons[top_j].x;
    }
  }
  return stim_multiplier * f *
         (1.0 + k1 * std::sin(k2 * state.t) + same_gain * same + cross_gain * cross);
}

struct NeuronDerivative {
  double dx, dy, dz;
};

// Stein model right-hand side for one neuron.
inline NeuronDerivative stein_derivative(const NeuronState& n, double a, double f_c,
                                         const NeuronConstants& c = {}) {
  if (!std::isfinite(n.x) || !std::isfinite(n.y) || !std::isfinite(n.z) || !std::isfinite(f_c))
    throw std::invalid_argument("non-finite neuron state or driving signal");
  const double sig = saturating_sigmoid(-f_c - c.b * n.y + c.b * n.z);
  return {a * (-n.x + sig), n.x - c.p * n.y, n.x - c.q * n.z};
}

using StateVector = std::array<double, kStateDim>;  // layout: per neuron (x,y,z)
using StimMultipliers = std::array<double, kNumNeurons>;

inline constexpr StimMultipliers kNoStimulation = {1, 1, 1, 1, 1, 1, 1, 1};

// Full 24-component derivative; pure function of its arguments.
inline StateVector network_derivative(const NetworkState& state, const GaitParams& gait,
                                      const CouplingConfig& coupling,
                                      const StimMultipliers& stim = kNoStimulation,
                                      const NeuronConstants& consts = {}) {
  StateVector d{};
  for (int i = 0; i < kNumNeurons; ++i) {
    const double a = i < 4 ? gait.a_h : gait.a_k;
    const double f_c = driving_signal(i, state, gait, coupling, stim[i]);
    const NeuronDerivative nd = stein_derivative(state.neurons[i], a, f_c, consts);
    d[3 * i + 0] = nd.dx;
    d[3 * i + 1] = nd.dy;
    d[3 * i + 2] = nd.dz;
  }
  return d;
}

inline StateVector pack_state(const NetworkState& s) {
  StateVector v{};
  for (int i = 0; i < kNumNeurons; ++i) {
    v[3 * i + 0] = s.neurons[i].x;
    v[3 * i + 1] = s.neurons[i].y;
    v[3 * i + 2] = s.neurons[i].z;
  }
  return v;
}

inline NetworkState unpack_state(const StateVector& v, double t) {
  NetworkState s;
  for (int i = 0; i < kNumNeurons; ++i)
    s.neurons[i] = {v[3 * i + 0], v[3 * i + 1], v[3 * i + 2]};
  s.t = t;
  return s;
}

}  // namespace cpg8
