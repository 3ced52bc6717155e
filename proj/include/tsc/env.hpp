#pragma once

// RL environment over the simulator: 464-dim state encoding, equity-factor
// throughput reward and elapsed-time (adaptive) discounting bookkeeping.

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "tsc/demand.hpp"
#include "tsc/sim.hpp"

namespace tsc {

inline constexpr int kLaneBlock = 2 * kLaneCapacity;
inline constexpr int kStateDim = kNumLanes * kLaneBlock + kNumPhases + kNumPhases;  // 464
inline constexpr int kOneHotOffset = kNumLanes * kLaneBlock;
inline constexpr int kCounterOffset = kOneHotOffset + kNumPhases;
inline constexpr double kCounterScale = 500.0;  // s

static_assert(kStateDim == 464);

using StateVector = std::array<float, kStateDim>;

/// Layout: 12 lane blocks of 19 (position, velocity) pairs, the one-hot last
/// action, then the per-phase seconds-since-active counters.
inline StateVector encode_state(const Snapshot& snap, int last_action,
                                const std::array<std::int64_t, kNumPhases>& since_active,
                                double v_max) {
  if (last_action < 0 || last_action >= kNumPhases) throw std::domain_error("encode_state: bad last action");
  StateVector s;
  for (int l = 0; l < kNumLanes; ++l) {
    const auto& veh = snap[l].vehicles;
    assert(static_cast<int>(veh.size()) <= kLaneCapacity);
    float* block = s.data() + l * kLaneBlock;
    const int n = std::min<int>(static_cast<int>(veh.size()), kLaneCapacity);
    for (int k = 0; k < kLaneCapacity; ++k) {
      if (k < n) {
        block[2 * k] = static_cast<float>(std::clamp(2.0 * veh[k].distance / kSensingRange - 1.0, -1.0, 1.0));
        block[2 * k + 1] = static_cast<float>(std::clamp(2.0 * veh[k].velocity / v_max - 1.0, -1.0, 1.0));
      } else {
        block[2 * k] = 1.0f;
        block[2 * k + 1] = -1.0f;
      }
    }
  }
  for (int p = 0; p < kNumPhases; ++p) {
    s[kOneHotOffset + p] = p == last_action ? 1.0f : 0.0f;
    if (since_active[p] < 0) throw std::domain_error("encode_state: negative counter");
    s[kCounterOffset + p] = static_cast<float>(std::min(1.0, static_cast<double>(since_active[p]) / kCounterScale));
  }
  return s;
}

// ---------------------------------------------------------------------------

enum class EquityForm { Power, Linear, Base };

struct RewardConfig {
  double eta = 0.25;
  double gamma = 0.98;
  EquityForm form = EquityForm::Power;
  bool adaptive_discounting = true;

  void validate() const {
    if (!(eta >= 0.0) || !std::isfinite(eta)) throw std::domain_error("RewardConfig: eta must be >= 0");
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::domain_error("RewardConfig: gamma must be in (0,1)");
    if (form != EquityForm::Power)
      throw std::invalid_argument("RewardConfig: only the power equity form is supported");
  }
};

/// Reward of one decision spanning releases.size() seconds:
/// sum_k gamma^k * sum_{v in second k} T_travel(v)^eta. With `adaptive` false
/// every second is weighted 1 (per-step discounting baseline).
inline double equity_reward(std::span<const std::vector<std::int64_t>> releases, double eta, double gamma,
                            bool adaptive = true) {
  double reward = 0.0;
  double weight = 1.0;
  for (const auto& second : releases) {
    double sum = 0.0;
    for (auto travel : second) {
      if (travel <= 0) throw std::domain_error("equity_reward: travel time must be positive");
      sum += eta == 0.0 ? 1.0 : std::pow(static_cast<double>(travel), eta);
    }
    reward += weight * sum;
    if (adaptive) weight *= gamma;
  }
  return reward;
}

inline double equity_reward(const TickResult& tick, double eta, double gamma, bool adaptive = true) {
  const auto lists = tick.travel_times_by_second();
  return equity_reward(std::span<const std::vector<std::int64_t>>(lists), eta, gamma, adaptive);
}

/// Travel-time reward: minus the discounted count of unreleased vehicles per second.
inline double travel_time_reward(const TickResult& tick, double gamma, bool adaptive = true) {
  double reward = 0.0;
  double weight = 1.0;
  for (const auto& s : tick.seconds) {
    double n = 0.0;
    for (int l = 0; l < kNumLanes; ++l) n += s.lane_counts[l] + s.backlog[l];
    reward -= weight * n;
    if (adaptive) weight *= gamma;
  }
  return reward;
}

// ---------------------------------------------------------------------------

struct Transition {
  StateVector state{};
  int action = 0;
  double reward = 0.0;
  int delta_t = 1;
  StateVector next_state{};
  bool done = false;
};

class Env {
 public:
  explicit Env(SimParams sim = {}, RewardConfig reward = {}) : params_(sim), reward_(reward), sim_(sim) {
    reward_.validate();
    state_ = encode();
  }

  void reset(ArrivalStream stream, std::int64_t duration) {
    sim_ = Simulator(params_, duration);
    sim_.bind_arrivals(std::move(stream));
    last_action_ = 0;
    last_tick_ = TickResult{};
    state_ = encode();
  }

  void reset(const DemandEpisode& ep) { reset(realize(ep), ep.duration); }

  Transition step(int action) {
    if (sim_.finished()) throw EpisodeEnded{};
    Transition tr;
    tr.state = state_;
    tr.action = action;
    last_tick_ = sim_.apply_action(action);
    tr.delta_t = last_tick_.elapsed;
    tr.reward = equity_reward(last_tick_, reward_.eta, reward_.gamma, reward_.adaptive_discounting);
    last_action_ = action;
    state_ = encode();
    tr.next_state = state_;
    tr.done = sim_.finished();
    return tr;
  }

  bool done() const noexcept { return sim_.finished(); }
  const StateVector& state() const noexcept { return state_; }
  const Simulator& sim() const noexcept { return sim_; }
  const TickResult& last_tick() const noexcept { return last_tick_; }
  int last_action() const noexcept { return last_action_; }
  const RewardConfig& reward_config() const noexcept { return reward_; }

 private:
  StateVector encode() const {
    std::array<std::int64_t, kNumPhases> since{};
    for (int p = 0; p < kNumPhases; ++p) since[p] = sim_.seconds_since_active(p);
    return encode_state(sim_.snapshot(), last_action_, since, params_.v_max);
  }

  SimParams params_;
  RewardConfig reward_;
  Simulator sim_;
  int last_action_ = 0;
  TickResult last_tick_{};
  StateVector state_{};
};

/// Discounted return of a transition sequence: sum_t gamma^{elapsed before t} r_t.
/// With `adaptive` false the exponent counts decisions instead of seconds.
inline double discounted_return(std::span<const Transition> transitions, double gamma, bool adaptive = true) {
  double ret = 0.0;
  double weight = 1.0;
  for (const auto& tr : transitions) {
    ret += weight * tr.reward;
    weight *= adaptive ? std::pow(gamma, tr.delta_t) : gamma;
  }
  return ret;
}

}  // namespace tsc
