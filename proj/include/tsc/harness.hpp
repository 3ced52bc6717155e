#pragma once

// Evaluation, per-episode baseline tuning and ablation training curves.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "tsc/controllers.hpp"
#include "tsc/demand.hpp"
#include "tsc/env.hpp"
#include "tsc/ppo.hpp"
#include "tsc/trace.hpp"

namespace tsc {

struct Band {
  double lo = 0.0;
  double hi = 0.0;
  std::string label() const { return std::to_string(static_cast<long>(lo)) + "-" + std::to_string(static_cast<long>(hi)); }
};

inline const std::vector<Band>& evaluation_bands() {
  static const std::vector<Band> bands{{500, 1500}, {1500, 2500}, {2500, 3500}, {3500, 4500}, {4500, 5500}};
  return bands;
}

/// A decision rule: given the environment, the next green phase.
using DecisionFn = std::function<int(const Env&)>;
/// Builds a fresh decision rule for each episode.
using AgentFactory = std::function<DecisionFn()>;

inline AgentFactory controller_agent(Controller prototype) {
  return [prototype] {
    return DecisionFn([c = prototype](const Env& env) mutable {
      return controller_next(c, observe(env.sim(), &env.last_tick()));
    });
  };
}

inline AgentFactory random_agent(std::uint64_t seed) {
  auto counter = std::make_shared<std::uint64_t>(0);
  return [seed, counter] {
    return DecisionFn([rng = CounterRng(CounterRng::derive(seed, (*counter)++))](const Env&) mutable {
      return static_cast<int>(rng.below(kNumPhases));
    });
  };
}

template <typename Scalar>
AgentFactory greedy_policy_agent(const ActorCritic<Scalar>& model) {
  return [&model] { return DecisionFn([&model](const Env& env) { return greedy_action(model, env.state()); }); };
}

/// Samples the policy; every episode draws from its own stream.
template <typename Scalar>
AgentFactory sampling_policy_agent(const ActorCritic<Scalar>& model, std::uint64_t seed) {
  auto counter = std::make_shared<std::uint64_t>(0);
  return [&model, seed, counter] {
    return DecisionFn([&model, rng = CounterRng(CounterRng::derive(seed, (*counter)++))](const Env& env) mutable {
      return sample_action(evaluate_policy(model, env.state()).probs, rng);
    });
  };
}

// ---------------------------------------------------------------------------

struct EpisodeMetrics {
  std::uint64_t seed = 0;
  std::uint64_t generated = 0;
  std::uint64_t released = 0;
  double mean_travel = 0.0;  // released vehicles only
  double std_travel = 0.0;
  double mean_wait = 0.0;    // unreleased vehicles: T_episode - T_in
  double throughput_pct = 100.0;
  // Pooled sums so band aggregates weight every vehicle equally.
  double travel_sum = 0.0;
  double travel_sq_sum = 0.0;
  double wait_sum = 0.0;
};

/// Metrics at exactly `duration`; a final transition may run past it, and
/// vehicles released after `duration` count as unreleased.
inline EpisodeMetrics episode_metrics(const Simulator& sim, std::int64_t duration) {
  EpisodeMetrics m;
  m.generated = sim.spawned();
  for (const auto& r : sim.release_log()) {
    if (r.release_time > duration) {
      m.wait_sum += static_cast<double>(duration - r.entry_time);
      continue;
    }
    ++m.released;
    const auto t = static_cast<double>(r.travel_time());
    m.travel_sum += t;
    m.travel_sq_sum += t * t;
  }
  for (auto e : sim.unreleased_entry_times()) m.wait_sum += static_cast<double>(duration - e);
  const std::uint64_t unreleased = m.generated - m.released;
  if (m.released > 0) {
    m.mean_travel = m.travel_sum / m.released;
    m.std_travel = std::sqrt(std::max(0.0, m.travel_sq_sum / m.released - m.mean_travel * m.mean_travel));
  }
  if (unreleased > 0) m.mean_wait = m.wait_sum / unreleased;
  m.throughput_pct = m.generated == 0 ? 100.0 : 100.0 * static_cast<double>(m.released) / m.generated;
  return m;
}

/// Optional sinks receive the per-second trace and the transitions as JSONL.
inline EpisodeMetrics run_episode(const DecisionFn& agent, const ArrivalStream& stream, std::int64_t duration,
                                  const SimParams& sim = {}, const RewardConfig& reward = {},
                                  std::ostream* trace = nullptr, std::ostream* transitions = nullptr) {
  Env env(sim, reward);
  env.reset(stream, duration);
  while (!env.done()) {
    const auto tr = env.step(agent(env));
    if (trace) write_trace(*trace, env.last_tick());
    if (transitions) write_jsonl(*transitions, to_json(tr));
  }
  return episode_metrics(env.sim(), duration);
}

struct EvalReport {
  std::string controller;
  Band band;
  std::uint64_t seed = 0;
  std::vector<EpisodeMetrics> episodes;
  EpisodeMetrics aggregate;
};

inline EpisodeMetrics aggregate_metrics(const std::vector<EpisodeMetrics>& eps) {
  EpisodeMetrics a;
  for (const auto& e : eps) {
    a.generated += e.generated;
    a.released += e.released;
    a.travel_sum += e.travel_sum;
    a.travel_sq_sum += e.travel_sq_sum;
    a.wait_sum += e.wait_sum;
  }
  const std::uint64_t unreleased = a.generated - a.released;
  if (a.released > 0) {
    a.mean_travel = a.travel_sum / a.released;
    a.std_travel = std::sqrt(std::max(0.0, a.travel_sq_sum / a.released - a.mean_travel * a.mean_travel));
  }
  if (unreleased > 0) a.mean_wait = a.wait_sum / unreleased;
  a.throughput_pct = a.generated == 0 ? 100.0 : 100.0 * static_cast<double>(a.released) / a.generated;
  return a;
}

/// Evaluation episodes for a band; both flow endpoints drawn from the band.
inline std::vector<DemandEpisode> band_episodes(const Band& band, int count, std::int64_t duration,
                                                std::uint64_t seed) {
  std::vector<DemandEpisode> out;
  for (int i = 0; i < count; ++i) {
    const auto s = CounterRng::derive(CounterRng::derive(seed, static_cast<std::uint64_t>(band.lo * 7 + band.hi)),
                                      static_cast<std::uint64_t>(i));
    out.push_back(sample_eval_episode(band.lo, band.hi, duration, s));
  }
  return out;
}

inline EvalReport evaluate(const std::string& id, const AgentFactory& agent, const Band& band, int episodes,
                           std::int64_t duration, std::uint64_t seed, const SimParams& sim = {},
                           const RewardConfig& reward = {}) {
  if (episodes < 1) throw std::invalid_argument("evaluate: need at least one episode");
  EvalReport rep{id, band, seed, {}, {}};
  for (const auto& ep : band_episodes(band, episodes, duration, seed)) {
    auto m = run_episode(agent(), realize(ep), duration, sim, reward);
    m.seed = ep.seed;
    rep.episodes.push_back(m);
  }
  rep.aggregate = aggregate_metrics(rep.episodes);
  return rep;
}

inline void write_report_header(std::ostream& os, std::uint64_t seed) {
  os << "# seed=" << seed << "\n";
  os << "controller,band,episode,episode_seed,generated,released,mean_travel_s,std_travel_s,mean_wait_s,throughput_pct\n";
}

inline void write_report_rows(std::ostream& os, const EvalReport& r) {
  auto row = [&](const std::string& ep, const EpisodeMetrics& m) {
    os << r.controller << ',' << r.band.label() << ',' << ep << ',' << m.seed << ',' << m.generated << ','
       << m.released << ',' << m.mean_travel << ',' << m.std_travel << ',' << m.mean_wait << ','
       << m.throughput_pct << '\n';
  };
  for (std::size_t i = 0; i < r.episodes.size(); ++i) row(std::to_string(i), r.episodes[i]);
  row("all", r.aggregate);
}

/// Mean/std travel time and throughput per (band, controller).
inline void write_plot_data(std::ostream& os, const std::vector<EvalReport>& reports) {
  os << "band,controller,mean_travel_s,std_travel_s,throughput_pct,mean_wait_s\n";
  for (const auto& r : reports)
    os << r.band.label() << ',' << r.controller << ',' << r.aggregate.mean_travel << ',' << r.aggregate.std_travel
       << ',' << r.aggregate.throughput_pct << ',' << r.aggregate.mean_wait << '\n';
}

// ---------------------------------------------------------------------------
// Baseline tuning

struct GridPoint {
  std::string label;
  Controller controller;
};

inline std::vector<GridPoint> default_grid(ControllerKind kind, double saturation_flow = 0.5) {
  std::vector<GridPoint> g;
  switch (kind) {
    case ControllerKind::Uniform:
      for (int d = 5; d <= 60; d += 5) g.push_back({"green=" + std::to_string(d), UniformController(d)});
      break;
    case ControllerKind::Webster:
      for (double h : {300.0, 600.0})
        for (auto [lo, hi] : {std::pair{40.0, 160.0}, std::pair{60.0, 200.0}})
          g.push_back({"history=" + std::to_string(static_cast<int>(h)) + ";cycle=" + std::to_string(static_cast<int>(lo)) +
                           ".." + std::to_string(static_cast<int>(hi)),
                       WebsterController({h, lo, hi, saturation_flow})});
      break;
    case ControllerKind::MaxPressure:
      for (int m = 1; m <= 15; ++m) g.push_back({"g_min=" + std::to_string(m), MaxPressureController(m)});
      break;
  }
  return g;
}

struct TuneResult {
  std::string label;
  Controller controller;
  EpisodeMetrics metrics;
};

/// Strict weak order: lower mean travel, then higher throughput, then lower
/// waiting time, then label. Episodes without releases rank last.
inline bool better_score(const EpisodeMetrics& a, const std::string& la, const EpisodeMetrics& b,
                         const std::string& lb) {
  auto key = [](const EpisodeMetrics& m) {
    const double travel = m.released > 0 ? m.mean_travel : std::numeric_limits<double>::infinity();
    return std::make_tuple(travel, -m.throughput_pct, m.mean_wait);
  };
  const auto ka = key(a), kb = key(b);
  if (ka != kb) return ka < kb;
  return la < lb;
}

inline TuneResult tune_baseline(const std::vector<GridPoint>& grid, const ArrivalStream& stream,
                                std::int64_t duration, const SimParams& sim = {}) {
  if (grid.empty()) throw std::invalid_argument("tune_baseline: empty grid");
  std::optional<TuneResult> best;
  for (const auto& gp : grid) {
    auto m = run_episode(controller_agent(gp.controller)(), stream, duration, sim);
    if (!best || better_score(m, gp.label, best->metrics, best->label)) best = TuneResult{gp.label, gp.controller, m};
  }
  return *best;
}

/// Evaluates a baseline tuned separately on every episode of the band.
inline EvalReport evaluate_tuned(ControllerKind kind, const Band& band, int episodes, std::int64_t duration,
                                 std::uint64_t seed, const SimParams& sim = {}, double saturation_flow = 0.5) {
  EvalReport rep{std::string("tuned-") + to_string(kind), band, seed, {}, {}};
  const auto grid = default_grid(kind, saturation_flow);
  for (const auto& ep : band_episodes(band, episodes, duration, seed)) {
    auto m = tune_baseline(grid, realize(ep), duration, sim).metrics;
    m.seed = ep.seed;
    rep.episodes.push_back(m);
  }
  rep.aggregate = aggregate_metrics(rep.episodes);
  return rep;
}

// ---------------------------------------------------------------------------
// Ablations

struct AblationConfig {
  std::string label;
  bool adaptive_discounting = true;
  double eta = 0.25;
};

inline std::vector<AblationConfig> standard_ablation_configs() {
  return {{"[x]+[eta=0]", false, 0.0},
          {"[x]+[eta=0.25]", false, 0.25},
          {"[ad]+[eta=0]", true, 0.0},
          {"[ad]+[eta=1]", true, 1.0},
          {"[ad]+[eta=0.25]", true, 0.25}};
}

struct CurvePoint {
  std::string config;
  std::uint64_t seed = 0;
  std::int64_t step = 0;
  std::string band;
  double mean_wait = 0.0;
  double mean_travel = 0.0;
  double throughput_pct = 0.0;
};

struct AblationRun {
  AblationConfig config;
  std::uint64_t seed = 0;
  std::vector<CurvePoint> curve;
  bool diverged = false;
  ActorCritic<float> model;
};

struct AblationOptions {
  std::int64_t budget = 100;  // learner steps
  std::int64_t eval_every = 20;
  int eval_episodes = 2;
  std::int64_t eval_duration = 600;
  std::uint64_t eval_seed = 2024;
  std::vector<Band> bands = evaluation_bands();
  std::function<void(const CurvePoint&)> on_point;
};

inline std::vector<CurvePoint> evaluate_model(const ActorCritic<float>& model, const std::string& label,
                                              std::uint64_t seed, std::int64_t step, const AblationOptions& opt,
                                              const SimParams& sim) {
  std::vector<CurvePoint> pts;
  for (const auto& band : opt.bands) {
    const auto rep = evaluate(label, greedy_policy_agent(model), band, opt.eval_episodes, opt.eval_duration,
                              opt.eval_seed, sim);
    pts.push_back({label, seed, step, band.label(), rep.aggregate.mean_wait, rep.aggregate.mean_travel,
                   rep.aggregate.throughput_pct});
    if (opt.on_point) opt.on_point(pts.back());
  }
  return pts;
}

/// Trains one configuration and records waiting-time curves every `eval_every`
/// learner steps and at the end of the budget.
inline AblationRun train_with_curve(const AblationConfig& ac, PpoConfig base, std::uint64_t seed,
                                    const AblationOptions& opt, const SimParams& sim = {}) {
  base.adaptive_discounting = ac.adaptive_discounting;
  base.eta = ac.eta;
  base.seed = seed;
  PpoTrainer trainer(base, sim);
  AblationRun run{ac, seed, {}, false, {}};
  auto record = [&] {
    auto pts = evaluate_model(trainer.model(), ac.label, seed, trainer.steps(), opt, sim);
    run.curve.insert(run.curve.end(), pts.begin(), pts.end());
  };
  try {
    for (std::int64_t s = 0; s < opt.budget; ++s) {
      trainer.learn_step();
      if (trainer.steps() % opt.eval_every == 0 || trainer.steps() == opt.budget) record();
    }
  } catch (const NumericError&) {
    run.diverged = true;
  }
  run.model = trainer.model();
  return run;
}

inline std::vector<AblationRun> ablation_suite(const std::vector<AblationConfig>& configs, const PpoConfig& base,
                                               const std::vector<std::uint64_t>& seeds, const AblationOptions& opt,
                                               const SimParams& sim = {}) {
  std::vector<AblationRun> runs;
  for (const auto& c : configs)
    for (auto s : seeds) runs.push_back(train_with_curve(c, base, s, opt, sim));
  return runs;
}

inline void write_curves_csv(std::ostream& os, const std::vector<AblationRun>& runs) {
  os << "config,seed,step,band,mean_wait_s,mean_travel_s,throughput_pct,diverged\n";
  for (const auto& r : runs)
    for (const auto& p : r.curve)
      os << '"' << p.config << "\"," << p.seed << ',' << p.step << ',' << p.band << ',' << p.mean_wait << ','
         << p.mean_travel << ',' << p.throughput_pct << ',' << (r.diverged ? 1 : 0) << '\n';
}

}  // namespace tsc
