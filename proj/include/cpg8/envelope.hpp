#pragma once

#include <cmath>
#include <stdexcept>

namespace cpg8 {

// Time-limited multiplier applied to the amplitude parameter of stimulated
// neurons. Log-shaped rising/falling edges joined by a flat plateau at R_P:
// the primitive curves log10(x) on [1,10] and log_0.1(x) on [0.1,1] are
// mapped affinely onto multiplier 1 -> R_P and R_P -> 1.
struct StimulationEnvelope {
  double r_p = 1.0;    // gain ratio (> 1)
  double t_p = 0.0;    // total duration, seconds
  double eta_r = 0.1;  // rising duty cycle
  double eta_f = 0.1;  // falling duty cycle
  double t0 = 0.0;     // execution time, seconds

  double rise_duration() const { return eta_r * t_p; }
  double fall_duration() const { return eta_f * t_p; }

  void validate() const {
    if (r_p < 1.0 || t_p <= 0.0) throw std::invalid_argument("bad envelope gain or duration");
    if (eta_r <= 0.0 || eta_f <= 0.0 || eta_r + eta_f > 1.0)
      throw std::invalid_argument("bad envelope duty cycles");
  }

  bool expired(double t) const { return t > t0 + t_p; }
};

inline double envelope_multiplier(const StimulationEnvelope& env, double t) {
  if (t < env.t0 || t > env.t0 + env.t_p) return 1.0;
  const double t_r = env.rise_duration();
  const double t_f = env.fall_duration();
  const double rel = t - env.t0;
  if (rel < t_r) {
    const double u = rel / t_r;
    return 1.0 + (env.r_p - 1.0) * std::log10(1.0 + 9.0 * u);
  }
  if (rel <= env.t_p - t_f) return env.r_p;
  const double v = (rel - (env.t_p - t_f)) / t_f;
  // log base 0.1 of (0.1 + 0.9 v): 1 at v=0, 0 at v=1
  return 1.0 + (env.r_p - 1.0) * (-std::log10(0.1 + 0.9 * v));
}

}  // namespace cpg8
