#pragma once

// JSONL dumps: one record per simulated second, one per RL transition.

#include <ostream>

#include <json.hpp>

#include "tsc/env.hpp"
#include "tsc/sim.hpp"

namespace tsc {

inline nlohmann::json to_json(const SecondRecord& s) {
  nlohmann::json rel = nlohmann::json::array();
  for (const auto& r : s.releases)
    rel.push_back({{"id", r.id}, {"lane", r.lane}, {"entry", r.entry_time}, {"release", r.release_time},
                   {"travel", r.travel_time()}});
  return {{"t", s.t},          {"phase", s.phase},   {"signal", to_string(s.signal)},
          {"counts", s.lane_counts}, {"backlog", s.backlog}, {"releases", std::move(rel)}};
}

inline nlohmann::json to_json(const Transition& tr) {
  return {{"state", tr.state},   {"action", tr.action},         {"reward", tr.reward},
          {"delta_t", tr.delta_t}, {"next_state", tr.next_state}, {"done", tr.done}};
}

inline void write_jsonl(std::ostream& os, const nlohmann::json& j) { os << j.dump() << '\n'; }

inline void write_trace(std::ostream& os, const TickResult& tick) {
  for (const auto& s : tick.seconds) write_jsonl(os, to_json(s));
}

}  // namespace tsc
