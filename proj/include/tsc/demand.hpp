#pragma once

// Stochastic demand episodes and their realization as per-lane arrival streams.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "tsc/rng.hpp"
#include "tsc/sim.hpp"

namespace tsc {

inline constexpr double kMaxFlowStep = 1500.0;  // v/h, bound on |F_end - F_begin| for training episodes

using LaneRatios = std::array<double, kNumLanes>;

struct DemandEpisode {
  std::int64_t duration = 1200;
  double flow_begin = 0.0;  // v/h, all lanes
  double flow_end = 0.0;
  LaneRatios ratios_begin{};
  LaneRatios ratios_end{};
  std::uint64_t seed = 0;

  /// Expected arrivals per second on `lane` at integer second `t`.
  double rate(int lane, std::int64_t t) const noexcept {
    const double a = flow_begin * ratios_begin[lane];
    const double b = flow_end * ratios_end[lane];
    const double x = static_cast<double>(t) / static_cast<double>(duration);
    return (a + (b - a) * x) / 3600.0;
  }

  /// Sum of rate() over all lanes and seconds; the exact mean arrival count.
  double expected_arrivals() const noexcept {
    double total = 0.0;
    for (int l = 0; l < kNumLanes; ++l)
      for (std::int64_t t = 0; t < duration; ++t) total += rate(l, t);
    return total;
  }
};

using ArrivalStream = std::vector<Arrival>;

namespace detail {

inline LaneRatios sample_ratios(CounterRng& rng) {
  LaneRatios r{};
  double sum = 0.0;
  for (auto& x : r) {
    x = rng.uniform();
    sum += x;
  }
  if (sum <= 0.0) {
    r.fill(1.0 / kNumLanes);
    return r;
  }
  for (auto& x : r) x /= sum;
  return r;
}

inline void check_band(double lo, double hi, std::int64_t duration) {
  if (!(lo >= 0.0) || !(hi >= lo) || !std::isfinite(hi))
    throw std::domain_error("demand: flow range must satisfy 0 <= F_min <= F_max");
  if (duration <= 0) throw std::domain_error("demand: duration must be positive");
}

}  // namespace detail

/// Training episode: F_begin uniform in [F_min, F_max], F_end uniform within
/// 1500 v/h of it (clamped to the range), two independent normalized ratio vectors.
inline DemandEpisode sample_episode(double flow_min, double flow_max, std::int64_t duration,
                                    std::uint64_t seed) {
  detail::check_band(flow_min, flow_max, duration);
  if (!(flow_min < flow_max)) throw std::domain_error("sample_episode: requires F_min < F_max");
  CounterRng rng(CounterRng::derive(seed, 0xD311A4D));
  DemandEpisode ep;
  ep.duration = duration;
  ep.seed = seed;
  ep.flow_begin = rng.uniform(flow_min, flow_max);
  const double lo = std::max(flow_min, ep.flow_begin - kMaxFlowStep);
  const double hi = std::min(flow_max, ep.flow_begin + kMaxFlowStep);
  ep.flow_end = rng.uniform(lo, hi);
  ep.ratios_begin = detail::sample_ratios(rng);
  ep.ratios_end = detail::sample_ratios(rng);
  return ep;
}

/// Range of F_end admitted for a given F_begin.
inline std::pair<double, double> flow_end_range(double flow_begin, double flow_min, double flow_max) {
  return {std::max(flow_min, flow_begin - kMaxFlowStep), std::min(flow_max, flow_begin + kMaxFlowStep)};
}

/// Evaluation episode: both endpoints drawn independently from the band.
inline DemandEpisode sample_eval_episode(double band_lo, double band_hi, std::int64_t duration,
                                         std::uint64_t seed) {
  detail::check_band(band_lo, band_hi, duration);
  CounterRng rng(CounterRng::derive(seed, 0xE7A1));
  DemandEpisode ep;
  ep.duration = duration;
  ep.seed = seed;
  ep.flow_begin = rng.uniform(band_lo, band_hi);
  ep.flow_end = rng.uniform(band_lo, band_hi);
  ep.ratios_begin = detail::sample_ratios(rng);
  ep.ratios_end = detail::sample_ratios(rng);
  return ep;
}

/// Per-second, per-lane Poisson arrivals at the interpolated rate. Several
/// arrivals in one lane-second are all emitted; the simulator backlogs the excess.
inline ArrivalStream realize(const DemandEpisode& ep) {
  CounterRng rng(CounterRng::derive(ep.seed, 0xA5517A1));
  ArrivalStream out;
  for (std::int64_t t = 0; t < ep.duration; ++t) {
    for (int l = 0; l < kNumLanes; ++l) {
      const auto k = rng.poisson(ep.rate(l, t));
      for (std::uint32_t i = 0; i < k; ++i) out.push_back({t, l});
    }
  }
  return out;
}

inline nlohmann::json to_json(const DemandEpisode& ep) {
  return {{"duration", ep.duration},       {"flow_begin", ep.flow_begin},
          {"flow_end", ep.flow_end},       {"ratios_begin", ep.ratios_begin},
          {"ratios_end", ep.ratios_end},   {"seed", ep.seed}};
}

inline DemandEpisode episode_from_json(const nlohmann::json& j) {
  DemandEpisode ep;
  ep.duration = j.at("duration").get<std::int64_t>();
  ep.flow_begin = j.at("flow_begin").get<double>();
  ep.flow_end = j.at("flow_end").get<double>();
  ep.ratios_begin = j.at("ratios_begin").get<LaneRatios>();
  ep.ratios_end = j.at("ratios_end").get<LaneRatios>();
  ep.seed = j.at("seed").get<std::uint64_t>();
  return ep;
}

inline void write_csv(std::ostream& os, const ArrivalStream& stream) {
  os << "second,lane\n";
  for (const auto& a : stream) os << a.time << ',' << a.lane << '\n';
}

}  // namespace tsc
