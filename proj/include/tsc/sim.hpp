#pragma once

// Deterministic 1-second microscopic simulator of an isolated four-road
// intersection with three incoming lanes per road.

#include <algorithm>
#include <array>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tsc {

inline constexpr int kNumRoads = 4;
inline constexpr int kLanesPerRoad = 3;
inline constexpr int kNumLanes = kNumRoads * kLanesPerRoad;
inline constexpr int kNumPhases = 4;
inline constexpr int kLaneCapacity = 19;
inline constexpr double kSensingRange = 150.0;
inline constexpr int kYellowSeconds = 3;
inline constexpr int kAllRedSeconds = 2;
inline constexpr int kTransitionSeconds = kYellowSeconds + kAllRedSeconds;  // T_yr

// Roads are ordered N, S, E, W; lanes within a road are ordered by role.
enum class LaneRole : std::uint8_t { Through = 0, ThroughRight = 1, Left = 2 };
enum class Route : std::uint8_t { Through, Right, Left };

constexpr int lane_index(int road, LaneRole role) noexcept {
  return road * kLanesPerRoad + static_cast<int>(role);
}
constexpr int road_of(int lane) noexcept { return lane / kLanesPerRoad; }
constexpr LaneRole role_of(int lane) noexcept { return static_cast<LaneRole>(lane % kLanesPerRoad); }

/// Green phases: 0 NS through+right, 1 NS left, 2 EW through+right, 3 EW left.
constexpr bool phase_serves(int phase, int lane) noexcept {
  const bool ns = road_of(lane) < 2;
  const bool left = role_of(lane) == LaneRole::Left;
  switch (phase) {
    case 0: return ns && !left;
    case 1: return ns && left;
    case 2: return !ns && !left;
    case 3: return !ns && left;
    default: return false;
  }
}

inline std::vector<int> phase_lanes(int phase) {
  std::vector<int> lanes;
  for (int l = 0; l < kNumLanes; ++l)
    if (phase_serves(phase, l)) lanes.push_back(l);
  return lanes;
}

/// Car-following and kinematic parameters. Lane capacity, sensing range and
/// the yellow/all-red durations are fixed topology constants above.
struct SimParams {
  double v_max = 50.0 / 3.6;  // m/s
  double acceleration = 2.6;  // m/s^2
  double spacing = 7.5;       // vehicle length + minimum gap, m
  double headway = 2.0;       // saturation time headway, s

  double free_flow_time() const noexcept { return kSensingRange / v_max; }

  void validate() const {
    if (!(v_max > 0.0) || !(acceleration > 0.0) || !(spacing > 0.0) || !(headway > 0.0))
      throw std::domain_error("SimParams: all dynamics parameters must be positive");
    if (spacing * kLaneCapacity > kSensingRange + spacing)
      throw std::domain_error("SimParams: spacing too large for 19 vehicles in 150 m");
  }
};

struct Vehicle {
  std::uint64_t id = 0;
  int lane = 0;
  double distance_to_light = kSensingRange;
  double velocity = 0.0;
  std::int64_t entry_time = 0;
  Route route = Route::Through;
  bool committed = false;  // may clear the line during the current yellow
};

struct Arrival {
  std::int64_t time = 0;
  int lane = 0;
  friend bool operator==(const Arrival&, const Arrival&) = default;
};

struct Release {
  std::uint64_t id = 0;
  int lane = 0;
  std::int64_t entry_time = 0;
  std::int64_t release_time = 0;
  std::int64_t travel_time() const noexcept { return release_time - entry_time; }
};

enum class SignalState : std::uint8_t { Green, Yellow, AllRed };

inline const char* to_string(SignalState s) noexcept {
  switch (s) {
    case SignalState::Green: return "green";
    case SignalState::Yellow: return "yellow";
    case SignalState::AllRed: return "all-red";
  }
  return "?";
}

/// One simulated second, (t-1, t].
struct SecondRecord {
  std::int64_t t = 0;
  SignalState signal = SignalState::Green;
  int phase = 0;  // green phase, phase being cleared (yellow) or phase about to start (all-red)
  std::vector<Release> releases;
  std::array<int, kNumLanes> lane_counts{};  // in range, after the second
  std::array<int, kNumLanes> backlog{};

  /// True if `lane` may discharge during this second.
  bool lane_open(int lane) const noexcept {
    return signal != SignalState::AllRed && phase_serves(phase, lane);
  }
};

struct TickResult {
  std::vector<SecondRecord> seconds;
  int elapsed = 1;
  std::int64_t sim_clock = 0;

  std::vector<std::vector<std::int64_t>> travel_times_by_second() const {
    std::vector<std::vector<std::int64_t>> out;
    out.reserve(seconds.size());
    for (const auto& s : seconds) {
      auto& v = out.emplace_back();
      for (const auto& r : s.releases) v.push_back(r.travel_time());
    }
    return out;
  }
  std::size_t released() const noexcept {
    std::size_t n = 0;
    for (const auto& s : seconds) n += s.releases.size();
    return n;
  }
};

/// Signal automaton. A transition to a different green phase always runs
/// 3 s yellow then 2 s all-red before the new phase turns green.
struct PhaseSchedule {
  int active_phase = 0;
  int pending_phase = 0;
  int transition_remaining = 0;

  bool in_transition() const noexcept { return transition_remaining > 0; }
  SignalState signal() const noexcept {
    if (transition_remaining == 0) return SignalState::Green;
    return transition_remaining > kAllRedSeconds ? SignalState::Yellow : SignalState::AllRed;
  }
};

struct LaneSnapshot {
  struct Entry {
    double distance;
    double velocity;
  };
  std::vector<Entry> vehicles;  // ascending distance
};
using Snapshot = std::array<LaneSnapshot, kNumLanes>;

class EpisodeEnded : public std::logic_error {
 public:
  EpisodeEnded() : std::logic_error("episode has ended") {}
};

class Simulator {
 public:
  explicit Simulator(SimParams params = {},
                     std::int64_t duration = std::numeric_limits<std::int64_t>::max())
      : params_(params), duration_(duration) {
    params_.validate();
    if (duration_ <= 0) throw std::domain_error("Simulator: duration must be positive");
  }

  /// Arrivals are spawned at the start of the second whose clock equals their time.
  void bind_arrivals(std::vector<Arrival> stream) {
    std::stable_sort(stream.begin(), stream.end(),
                     [](const Arrival& a, const Arrival& b) { return a.time < b.time; });
    for (const auto& a : stream) check_lane(a.lane);
    stream_ = std::move(stream);
    cursor_ = 0;
    while (cursor_ < stream_.size() && stream_[cursor_].time < clock_) ++cursor_;
  }

  /// Injects arrivals at the current clock. Arrivals that cannot enter the
  /// sensing range wait in a FIFO backlog and keep their arrival time as entry time.
  void spawn_vehicles(std::span<const Arrival> arrivals) {
    for (const auto& a : arrivals) {
      check_lane(a.lane);
      if (a.time != clock_) throw std::invalid_argument("spawn_vehicles: arrival time must equal sim clock");
    }
    for (const auto& a : arrivals) enqueue(a);
    drain_backlogs();
  }

  /// Places a vehicle directly (calibration and scripted scenarios).
  void place_vehicle(int lane, double distance, double velocity, std::int64_t entry_time) {
    check_lane(lane);
    auto& q = lanes_[lane];
    if (static_cast<int>(q.size()) >= kLaneCapacity) throw std::domain_error("place_vehicle: lane full");
    if (distance < 0.0 || distance > kSensingRange) throw std::domain_error("place_vehicle: distance out of range");
    if (velocity < 0.0 || velocity > params_.v_max) throw std::domain_error("place_vehicle: velocity out of range");
    Vehicle v{next_id_++, lane, distance, velocity, entry_time, route_for(lane, next_id_), false};
    auto pos = std::lower_bound(q.begin(), q.end(), distance,
                                [](const Vehicle& x, double d) { return x.distance_to_light < d; });
    if (pos != q.end() && pos->distance_to_light - distance < params_.spacing - 1e-9)
      throw std::domain_error("place_vehicle: violates minimum spacing");
    if (pos != q.begin() && distance - std::prev(pos)->distance_to_light < params_.spacing - 1e-9)
      throw std::domain_error("place_vehicle: violates minimum spacing");
    q.insert(pos, v);
    ++spawned_;
  }

  TickResult apply_action(int phase) {
    if (phase < 0 || phase >= kNumPhases) throw std::domain_error("apply_action: phase must be in 0..3");
    if (finished()) throw EpisodeEnded{};
    TickResult tick;
    if (phase == schedule_.active_phase) {
      tick.elapsed = 1;
      tick.seconds.push_back(step_second());
    } else {
      tick.elapsed = kTransitionSeconds + 1;
      schedule_.pending_phase = phase;
      schedule_.transition_remaining = kTransitionSeconds;
      commit_for_yellow(schedule_.active_phase);
      while (schedule_.transition_remaining > 0) {
        tick.seconds.push_back(step_second());
        --schedule_.transition_remaining;
        if (schedule_.transition_remaining == kAllRedSeconds) clear_commitments();
      }
      schedule_.active_phase = phase;
      green_seconds_ = 0;
      tick.seconds.push_back(step_second());
    }
    tick.sim_clock = clock_;
    return tick;
  }

  Snapshot snapshot() const {
    Snapshot s;
    for (int l = 0; l < kNumLanes; ++l) {
      s[l].vehicles.reserve(lanes_[l].size());
      for (const auto& v : lanes_[l]) s[l].vehicles.push_back({v.distance_to_light, v.velocity});
    }
    return s;
  }

  const std::vector<Vehicle>& lane_vehicles(int lane) const { return lanes_.at(lane); }

  const SimParams& params() const noexcept { return params_; }
  const PhaseSchedule& schedule() const noexcept { return schedule_; }
  std::int64_t clock() const noexcept { return clock_; }
  std::int64_t duration() const noexcept { return duration_; }
  bool finished() const noexcept { return clock_ >= duration_; }
  int active_phase() const noexcept { return schedule_.active_phase; }
  int green_seconds() const noexcept { return green_seconds_; }
  std::int64_t seconds_since_active(int phase) const { return since_active_.at(phase); }

  int lane_count(int lane) const { return static_cast<int>(lanes_.at(lane).size()); }
  int backlog_size(int lane) const { return static_cast<int>(backlog_.at(lane).size()); }

  std::uint64_t spawned() const noexcept { return spawned_; }
  std::uint64_t released() const noexcept { return release_log_.size(); }
  std::uint64_t in_system() const noexcept {
    std::uint64_t n = 0;
    for (const auto& q : lanes_) n += q.size();
    return n;
  }
  std::uint64_t backlogged() const noexcept {
    std::uint64_t n = 0;
    for (const auto& q : backlog_) n += q.size();
    return n;
  }

  const std::vector<Release>& release_log() const noexcept { return release_log_; }

  /// Entry times of vehicles spawned but not yet released, in range or backlogged.
  std::vector<std::int64_t> unreleased_entry_times() const {
    std::vector<std::int64_t> out;
    for (const auto& q : lanes_)
      for (const auto& v : q) out.push_back(v.entry_time);
    for (const auto& q : backlog_)
      for (const auto& v : q) out.push_back(v.entry_time);
    return out;
  }

  /// Sum over simulated seconds of the number of unreleased vehicles (N_t).
  std::int64_t vehicle_seconds() const noexcept { return vehicle_seconds_; }

 private:
  static std::array<double, kNumLanes> make_last_cross() noexcept {
    std::array<double, kNumLanes> a{};
    a.fill(-std::numeric_limits<double>::infinity());
    return a;
  }

  static void check_lane(int lane) {
    if (lane < 0 || lane >= kNumLanes) throw std::invalid_argument("lane index out of range");
  }

  static Route route_for(int lane, std::uint64_t id) noexcept {
    switch (role_of(lane)) {
      case LaneRole::Through: return Route::Through;
      case LaneRole::ThroughRight: return (id % 2 == 0) ? Route::Through : Route::Right;
      case LaneRole::Left: return Route::Left;
    }
    return Route::Through;
  }

  // Largest speed for the next second that keeps the follower behind a leader
  // whose updated distance is `leader_distance`: gap >= spacing and gap >= v' * headway.
  double safe_speed(double distance, double leader_distance) const noexcept {
    const double g = distance - leader_distance;
    return std::max(0.0, std::min(g - params_.spacing, g / (1.0 + params_.headway)));
  }

  bool can_enter(int lane) const noexcept {
    const auto& q = lanes_[lane];
    if (static_cast<int>(q.size()) >= kLaneCapacity) return false;
    return q.empty() || kSensingRange - q.back().distance_to_light >= params_.spacing - 1e-9;
  }

  void enqueue(const Arrival& a) {
    Vehicle v;
    v.id = next_id_++;
    v.lane = a.lane;
    v.entry_time = a.time;
    v.route = route_for(a.lane, v.id);
    backlog_[a.lane].push_back(v);
    ++spawned_;
  }

  void drain_backlogs() {
    for (int l = 0; l < kNumLanes; ++l) {
      auto& b = backlog_[l];
      while (!b.empty() && can_enter(l)) {
        Vehicle v = b.front();
        b.pop_front();
        v.distance_to_light = kSensingRange;
        v.velocity = params_.v_max;
        if (!lanes_[l].empty())
          v.velocity = std::min(v.velocity, safe_speed(kSensingRange, lanes_[l].back().distance_to_light));
        lanes_[l].push_back(v);
      }
    }
  }

  void commit_for_yellow(int phase) {
    for (int l = 0; l < kNumLanes; ++l) {
      if (!phase_serves(phase, l)) continue;
      for (auto& v : lanes_[l])
        v.committed = v.velocity > 0.0 && v.distance_to_light <= v.velocity * params_.headway;
    }
  }

  void clear_commitments() {
    for (auto& q : lanes_)
      for (auto& v : q) v.committed = false;
  }

  SecondRecord step_second() {
    SecondRecord rec;
    rec.signal = schedule_.signal();
    rec.phase = rec.signal == SignalState::AllRed ? schedule_.pending_phase : schedule_.active_phase;

    while (cursor_ < stream_.size() && stream_[cursor_].time <= clock_) enqueue(stream_[cursor_++]);
    drain_backlogs();
    vehicle_seconds_ += static_cast<std::int64_t>(in_system() + backlogged());

    const std::int64_t end = clock_ + 1;
    for (int l = 0; l < kNumLanes; ++l) {
      auto& q = lanes_[l];
      auto& ghost = ghosts_[l];
      if (ghost) {
        ghost->velocity = std::min(params_.v_max, ghost->velocity + params_.acceleration);
        ghost->distance_to_light -= ghost->velocity;
        if (ghost->distance_to_light < -kSensingRange) ghost.reset();
      }
      const bool green = rec.signal == SignalState::Green && phase_serves(rec.phase, l);
      const bool yellow = rec.signal == SignalState::Yellow && phase_serves(rec.phase, l);

      std::optional<double> leader = ghost ? std::optional<double>(ghost->distance_to_light) : std::nullopt;
      std::size_t released_here = 0;
      for (auto& v : q) {
        double next = std::min(params_.v_max, v.velocity + params_.acceleration);
        if (leader) next = std::min(next, safe_speed(v.distance_to_light, *leader));
        const bool may_cross = green || (yellow && v.committed);
        if (!may_cross) {
          next = std::min(next, v.distance_to_light);
        } else if (next > v.distance_to_light) {
          // Saturation headway at the stop line, on the 1 s release grid.
          const auto release = static_cast<double>(end);
          if (release - last_cross_[l] < params_.headway - 1e-9) next = v.distance_to_light;
          else last_cross_[l] = release;
        }
        v.velocity = next;
        v.distance_to_light -= next;
        if (v.distance_to_light < 0.0) {
          rec.releases.push_back({v.id, l, v.entry_time, end});
          ++released_here;
        } else if (v.distance_to_light < 1e-12) {
          v.distance_to_light = 0.0;
        }
        leader = v.distance_to_light;
      }
      if (released_here > 0) {
        // Released vehicles leave in front order; the last one becomes the ghost leader.
        ghost = q[released_here - 1];
        q.erase(q.begin(), q.begin() + static_cast<std::ptrdiff_t>(released_here));
      }
    }
    clock_ = end;

    if (rec.signal == SignalState::Green) ++green_seconds_;
    for (int p = 0; p < kNumPhases; ++p) {
      if (rec.signal == SignalState::Green && p == schedule_.active_phase) since_active_[p] = 0;
      else ++since_active_[p];
    }
    for (int l = 0; l < kNumLanes; ++l) {
      rec.lane_counts[l] = static_cast<int>(lanes_[l].size());
      rec.backlog[l] = static_cast<int>(backlog_[l].size());
    }
    rec.t = end;
    release_log_.insert(release_log_.end(), rec.releases.begin(), rec.releases.end());
    return rec;
  }

  SimParams params_;
  std::int64_t duration_;
  std::int64_t clock_ = 0;
  std::uint64_t next_id_ = 0;
  std::uint64_t spawned_ = 0;
  std::int64_t vehicle_seconds_ = 0;
  PhaseSchedule schedule_{};
  int green_seconds_ = 0;
  std::array<std::int64_t, kNumPhases> since_active_{};
  std::array<std::vector<Vehicle>, kNumLanes> lanes_{};
  std::array<std::deque<Vehicle>, kNumLanes> backlog_{};
  std::array<std::optional<Vehicle>, kNumLanes> ghosts_{};
  std::array<double, kNumLanes> last_cross_ = make_last_cross();
  std::vector<Arrival> stream_;
  std::size_t cursor_ = 0;
  std::vector<Release> release_log_;
};

/// Empirical saturation flow: one lane pre-filled to capacity with a
/// continuous backlog, green held for `seconds`. Returns releases per second.
inline double measure_saturation_flow(const SimParams& params = {}, int seconds = 300) {
  Simulator sim(params);
  const int lane = lane_index(0, LaneRole::Through);
  for (int k = 0; k < kLaneCapacity; ++k) sim.place_vehicle(lane, k * params.spacing, 0.0, 0);
  std::size_t released = 0;
  for (int s = 0; s < seconds; ++s) {
    const Arrival a{sim.clock(), lane};
    sim.spawn_vehicles(std::span<const Arrival>(&a, 1));
    released += sim.apply_action(0).released();
  }
  return static_cast<double>(released) / seconds;
}

}  // namespace tsc
