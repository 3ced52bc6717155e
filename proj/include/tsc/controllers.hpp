#pragma once

// Non-learning signal controllers: Uniform (fixed cycle), Webster's and Max-pressure.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>

#include "tsc/sim.hpp"

namespace tsc {

struct ControllerObservation {
  std::array<int, kNumLanes> incoming{};  // in-range vehicles per incoming lane
  std::array<int, kNumLanes> outgoing{};  // downstream vehicles; zero in this simulator
  int phase = 0;
  int green_seconds = 0;  // consecutive green seconds of `phase`
  std::array<std::int64_t, kNumPhases> since_active{};
  std::array<int, kNumLanes> recent_releases{};  // releases during the last decision
  std::int64_t clock = 0;
};

inline ControllerObservation observe(const Simulator& sim, const TickResult* last = nullptr) {
  ControllerObservation obs;
  for (int l = 0; l < kNumLanes; ++l) obs.incoming[l] = sim.lane_count(l);
  obs.phase = sim.active_phase();
  obs.green_seconds = sim.green_seconds();
  for (int p = 0; p < kNumPhases; ++p) obs.since_active[p] = sim.seconds_since_active(p);
  if (last)
    for (const auto& s : last->seconds)
      for (const auto& r : s.releases) ++obs.recent_releases[r.lane];
  obs.clock = sim.clock();
  return obs;
}

// ---------------------------------------------------------------------------

/// Cycles 0 -> 1 -> 2 -> 3 holding each phase for a fixed number of green seconds.
class UniformController {
 public:
  explicit UniformController(int green_duration) : green_(green_duration) {
    if (green_duration < 1) throw std::domain_error("Uniform: green_duration must be >= 1");
  }
  int next(const ControllerObservation& obs) const noexcept {
    return obs.green_seconds < green_ ? obs.phase : (obs.phase + 1) % kNumPhases;
  }
  void reset() noexcept {}
  int green_duration() const noexcept { return green_; }

 private:
  int green_;
};

// ---------------------------------------------------------------------------

struct WebsterParams {
  double history = 300.0;  // s
  double cycle_min = 40.0;
  double cycle_max = 160.0;
  double saturation_flow = 0.5;  // veh/s per lane
};

struct WebsterTiming {
  double cycle = 0.0;
  std::array<double, kNumPhases> greens{};
};

/// Classic Webster timing from per-phase critical flow ratios `y`.
/// Lost time is 4 * T_yr. Y >= 1 saturates at the maximum cycle.
inline WebsterTiming webster_timing(const std::array<double, kNumPhases>& y, double cycle_min,
                                    double cycle_max) {
  constexpr double lost = kNumPhases * kTransitionSeconds;
  double total = 0.0;
  for (double v : y) total += v;
  WebsterTiming t;
  if (total <= 0.0) {
    t.cycle = cycle_min;
    t.greens.fill(std::max(1.0, (cycle_min - lost) / kNumPhases));
    return t;
  }
  t.cycle = total >= 1.0 ? cycle_max : std::clamp((1.5 * lost + 5.0) / (1.0 - total), cycle_min, cycle_max);
  for (int p = 0; p < kNumPhases; ++p) t.greens[p] = std::max(1.0, (t.cycle - lost) * y[p] / total);
  return t;
}

/// Webster cycle before clamping: (1.5 L + 5) / (1 - Y).
inline double webster_cycle(double lost_time, double critical_sum) {
  return (1.5 * lost_time + 5.0) / (1.0 - critical_sum);
}

class WebsterController {
 public:
  explicit WebsterController(WebsterParams p) : p_(p) {
    if (!(p.history > 0.0)) throw std::domain_error("Webster: history must be positive");
    if (p.cycle_min < kNumPhases * (kTransitionSeconds + 1) || p.cycle_max < p.cycle_min)
      throw std::domain_error("Webster: requires 4*(T_yr+1) <= C_min <= C_max");
    if (!(p.saturation_flow > 0.0)) throw std::domain_error("Webster: saturation flow must be positive");
    reset();
  }

  void reset() {
    counts_.fill(0);
    window_start_ = 0;
    timing_ = webster_timing({}, p_.cycle_min, p_.cycle_max);
  }

  int next(const ControllerObservation& obs) {
    for (int l = 0; l < kNumLanes; ++l) counts_[l] += obs.recent_releases[l];
    const double window = static_cast<double>(obs.clock - window_start_);
    if (window >= p_.history) {
      std::array<double, kNumPhases> y{};
      for (int p = 0; p < kNumPhases; ++p)
        for (int l = 0; l < kNumLanes; ++l)
          if (phase_serves(p, l)) y[p] = std::max(y[p], counts_[l] / window / p_.saturation_flow);
      timing_ = webster_timing(y, p_.cycle_min, p_.cycle_max);
      counts_.fill(0);
      window_start_ = obs.clock;
    }
    const auto green = std::max<long>(1, std::lround(timing_.greens[obs.phase]));
    return obs.green_seconds < green ? obs.phase : (obs.phase + 1) % kNumPhases;
  }

  const WebsterTiming& timing() const noexcept { return timing_; }
  const WebsterParams& params() const noexcept { return p_; }

 private:
  WebsterParams p_;
  std::array<std::int64_t, kNumLanes> counts_{};
  std::int64_t window_start_ = 0;
  WebsterTiming timing_{};
};

// ---------------------------------------------------------------------------

inline double phase_pressure(const ControllerObservation& obs, int phase) noexcept {
  double p = 0.0;
  for (int l = 0; l < kNumLanes; ++l)
    if (phase_serves(phase, l)) p += obs.incoming[l] - obs.outgoing[l];
  return p;
}

/// Keeps the current phase for at least g_min green seconds, then picks the
/// phase of maximal pressure (ties: current phase, then lowest index).
class MaxPressureController {
 public:
  explicit MaxPressureController(int min_green) : min_green_(min_green) {
    if (min_green < 1) throw std::domain_error("Max-pressure: g_min must be >= 1");
  }
  int next(const ControllerObservation& obs) const noexcept {
    if (obs.green_seconds < min_green_) return obs.phase;
    double best = phase_pressure(obs, obs.phase);
    int arg = obs.phase;
    for (int p = 0; p < kNumPhases; ++p) {
      const double v = phase_pressure(obs, p);
      if (v > best) {
        best = v;
        arg = p;
      }
    }
    return arg;
  }
  void reset() noexcept {}
  int min_green() const noexcept { return min_green_; }

 private:
  int min_green_;
};

// ---------------------------------------------------------------------------

enum class ControllerKind { Uniform, Webster, MaxPressure };

inline const char* to_string(ControllerKind k) noexcept {
  switch (k) {
    case ControllerKind::Uniform: return "uniform";
    case ControllerKind::Webster: return "webster";
    case ControllerKind::MaxPressure: return "max-pressure";
  }
  return "?";
}

inline ControllerKind parse_controller_kind(const std::string& s) {
  if (s == "uniform") return ControllerKind::Uniform;
  if (s == "webster") return ControllerKind::Webster;
  if (s == "max-pressure") return ControllerKind::MaxPressure;
  throw std::invalid_argument("unknown controller '" + s + "'");
}

using Controller = std::variant<UniformController, WebsterController, MaxPressureController>;

inline int controller_next(Controller& c, const ControllerObservation& obs) {
  return std::visit([&](auto& x) { return x.next(obs); }, c);
}
inline void controller_reset(Controller& c) {
  std::visit([](auto& x) { x.reset(); }, c);
}

}  // namespace tsc
