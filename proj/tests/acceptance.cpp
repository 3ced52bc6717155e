// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.
//
//   acceptance            all criteria
//   acceptance 3 8        selected criteria only
//
// TSC_ACCEPTANCE_STEPS overrides the learner-step budget of criteria 9 and 10.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "tsc/eta.hpp"
#include "tsc/harness.hpp"

using namespace tsc;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// 1 -------------------------------------------------------------------------

/// Splits `seconds` into consecutive decisions of 1 or 6 elapsed seconds
/// (the last may be shorter when the trace runs out).
std::vector<int> random_schedule(std::size_t seconds, CounterRng& rng) {
  std::vector<int> out;
  std::size_t used = 0;
  while (used < seconds) {
    const int dt = static_cast<int>(std::min<std::size_t>(rng.below(2) ? 6 : 1, seconds - used));
    out.push_back(dt);
    used += dt;
  }
  return out;
}

double schedule_return(const std::vector<std::vector<std::int64_t>>& trace, const std::vector<int>& schedule,
                       double eta, double gamma) {
  std::vector<Transition> trs;
  std::size_t at = 0;
  for (int dt : schedule) {
    Transition tr;
    tr.delta_t = dt;
    tr.reward = equity_reward(std::span<const std::vector<std::int64_t>>(trace.data() + at, dt), eta, gamma, true);
    trs.push_back(tr);
    at += dt;
  }
  return discounted_return(trs, gamma, true);
}

Outcome criterion1() {
  CounterRng rng(0xC1);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t seconds = 50 + rng.below(400);
    std::vector<std::vector<std::int64_t>> trace(seconds);
    for (auto& sec : trace) {
      const auto n = rng.below(4);
      for (std::uint64_t i = 0; i < n; ++i) sec.push_back(11 + static_cast<std::int64_t>(rng.below(300)));
    }
    const double eta = rng.uniform(0.0, 1.0);
    const double gamma = rng.uniform(0.9, 0.999);
    const double a = schedule_return(trace, random_schedule(seconds, rng), eta, gamma);
    const double b = schedule_return(trace, random_schedule(seconds, rng), eta, gamma);
    const double c = schedule_return(trace, std::vector<int>(seconds, 1), eta, gamma);
    worst = std::max({worst, std::abs(a - b), std::abs(a - c)});
  }
  return {worst <= 1e-10, fmt("max |G_a - G_b| = %.3g over 100 traces", worst)};
}

// 2 -------------------------------------------------------------------------

Outcome criterion2() {
  CounterRng rng(0xC2);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t k = 1 + rng.below(256);
    std::vector<double> r(k), v(k + 1);
    for (auto& x : r) x = rng.normal() * 5.0;
    for (auto& x : v) x = rng.normal() * 20.0;
    const std::vector<int> dt(k, 1);
    const double gamma = rng.uniform(0.8, 0.999), lambda = rng.uniform(0.5, 1.0);
    const auto got = gae_adaptive(r, v, dt, gamma, lambda);
    const auto want = oracle::gae_direct(r, v, gamma, lambda);
    for (std::size_t i = 0; i < k; ++i) worst = std::max(worst, std::abs(got.advantages[i] - want[i]));
  }
  return {worst <= 1e-10, fmt("max |A - A_oracle| = %.3g over 1000 segments", worst)};
}

// 3 -------------------------------------------------------------------------

Outcome criterion3() {
  double worst = 0.0;
  std::size_t params = 0;
  const PpoCoefficients coeffs{};
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto p = oracle::make_grad_problem(seed, 12, 8, 20);
    const auto g = oracle::ppo_gradient_check(p.ac, p.inputs(), coeffs);
    worst = std::max(worst, g.max_rel_error);
    params += g.checked;
  }
  return {worst < 1e-4, fmt("max relative error %.3g over %zu parameters", worst, params)};
}

// 4 -------------------------------------------------------------------------

Outcome criterion4() {
  double worst = 0.0;
  int bound_violations = 0, points = 0;
  for (double gamma : {0.9, 0.93, 0.95, 0.98, 0.99})
    for (double fs : {0.25, 0.4, 0.5, 0.75, 1.0})
      for (double tf : {8.0, 10.8, 15.0}) {
        const eta::BoundInputs in{gamma, tf, fs, 5.0};
        const double horizon = eta::horizon_for(gamma);
        for (double e : {0.0, 0.25, 1.0}) {
          const double tau = tf + 20.0;
          const auto closed = eta::returns_scenario2(e, in, tau);
          const double never = eta::brute_force_returns(e, in, eta::ReleasePolicy::NeverRelease, 0.0, horizon);
          const double release = eta::brute_force_returns(e, in, eta::ReleasePolicy::ReleaseAtTau, tau, horizon);
          worst = std::max(worst, std::abs(never - closed.efficiency));
          if (release > closed.sup_equity + 1e-9) ++bound_violations;
          ++points;
        }
      }
  int straddle_failures = 0;
  for (double gamma : {0.9, 0.95, 0.98, 0.995})
    for (double tau : {1.0, 10.0, 30.0, 60.0, 200.0}) {
      const double b = eta::scenario1_upper(gamma, tau);
      if (!(std::pow(tau, b - 1e-3) > gamma * std::pow(tau + 1.0, b - 1e-3))) ++straddle_failures;
      if (!(std::pow(tau, b + 1e-3) < gamma * std::pow(tau + 1.0, b + 1e-3))) ++straddle_failures;
    }
  const bool pass = worst <= 1e-6 && bound_violations == 0 && straddle_failures == 0;
  return {pass, fmt("max |G_e - brute| = %.3g, sup violations %d/%d, straddle failures %d", worst, bound_violations,
                    points, straddle_failures)};
}

// 5 -------------------------------------------------------------------------

Outcome criterion5() {
  std::uint64_t violations = 0, red_releases = 0, seconds = 0, releases = 0;
  for (std::uint64_t ep_i = 0; ep_i < 50; ++ep_i) {
    const auto ep = sample_eval_episode(500, 5500, 600, CounterRng::derive(0xC5, ep_i));
    const auto stream = realize(ep);
    Simulator sim({}, ep.duration);
    sim.bind_arrivals(stream);
    CounterRng act(CounterRng::derive(0xC5A, ep_i));
    std::size_t arrived = 0;
    std::uint64_t released = 0;
    while (!sim.finished()) {
      const auto tick = sim.apply_action(static_cast<int>(act.below(kNumPhases)));
      for (const auto& s : tick.seconds) {
        ++seconds;
        // s.t is the end of the second; arrivals stamped before it have entered.
        while (arrived < stream.size() && stream[arrived].time < s.t) ++arrived;
        for (const auto& r : s.releases)
          if (!s.lane_open(r.lane)) ++red_releases;
        released += s.releases.size();
        std::uint64_t in_range = 0, queued = 0;
        for (int l = 0; l < kNumLanes; ++l) {
          in_range += static_cast<std::uint64_t>(s.lane_counts[l]);
          queued += static_cast<std::uint64_t>(s.backlog[l]);
        }
        if (arrived != released + in_range + queued) ++violations;
      }
      if (sim.spawned() != sim.released() + sim.in_system() + sim.backlogged()) ++violations;
    }
    releases += released;
  }
  return {violations == 0 && red_releases == 0,
          fmt("%llu seconds, %llu releases, %llu conservation violations, %llu red-light releases",
              (unsigned long long)seconds, (unsigned long long)releases, (unsigned long long)violations,
              (unsigned long long)red_releases)};
}

// 6 -------------------------------------------------------------------------

Outcome criterion6() {
  int snapshots = 0, bad_len = 0, out_of_box = 0, bad_empty = 0, bad_order = 0;
  std::uint64_t ep_i = 0;
  const SimParams params{};
  while (snapshots < 10000) {
    const auto ep = sample_eval_episode(500, 6000, 600, CounterRng::derive(0xC6, ep_i));
    Env env;
    env.reset(ep);
    CounterRng act(CounterRng::derive(0xC6A, ep_i++));
    while (!env.done() && snapshots < 10000) {
      env.step(static_cast<int>(act.below(kNumPhases)));
      const auto snap = env.sim().snapshot();
      std::array<std::int64_t, kNumPhases> since{};
      for (int p = 0; p < kNumPhases; ++p) since[p] = env.sim().seconds_since_active(p);
      const auto s = encode_state(snap, env.last_action(), since, params.v_max);
      ++snapshots;
      if (s.size() != 464) ++bad_len;
      for (float x : s)
        if (!(x >= -1.0f && x <= 1.0f)) {
          ++out_of_box;
          break;
        }
      for (int l = 0; l < kNumLanes; ++l) {
        const auto& veh = snap[l].vehicles;
        const float* block = s.data() + l * kLaneBlock;
        for (int k = 0; k < kLaneCapacity; ++k) {
          if (k >= static_cast<int>(veh.size()) && (block[2 * k] != 1.0f || block[2 * k + 1] != -1.0f)) ++bad_empty;
          if (k > 0 && k < static_cast<int>(veh.size())) {
            if (veh[k].distance < veh[k - 1].distance || block[2 * k] < block[2 * k - 2]) ++bad_order;
          }
        }
      }
    }
  }
  const bool pass = bad_len == 0 && out_of_box == 0 && bad_empty == 0 && bad_order == 0;
  return {pass, fmt("%d snapshots: length %d, box %d, empty-slot %d, order %d failures", snapshots, bad_len,
                    out_of_box, bad_empty, bad_order)};
}

// 7 -------------------------------------------------------------------------

Outcome criterion7() {
  int clamp_failures = 0, ratio_failures = 0;
  for (std::uint64_t i = 0; i < 10000; ++i) {
    const auto ep = sample_episode(0.0, 6000.0, 600, CounterRng::derive(0xC7, i));
    const auto [lo, hi] = flow_end_range(ep.flow_begin, 0.0, 6000.0);
    if (ep.flow_begin < 0.0 || ep.flow_begin > 6000.0 || ep.flow_end < lo || ep.flow_end > hi ||
        std::abs(ep.flow_end - ep.flow_begin) > kMaxFlowStep)
      ++clamp_failures;
    for (const auto* r : {&ep.ratios_begin, &ep.ratios_end}) {
      double sum = 0.0;
      for (double x : *r) sum += x;
      if (std::abs(sum - 1.0) > 1e-9) ++ratio_failures;
    }
  }
  // Pooled over 100 seeds, per lane: counts are Poisson with the analytic mean.
  std::array<double, kNumLanes> mean{}, count{};
  for (std::uint64_t i = 0; i < 100; ++i) {
    const auto ep = sample_eval_episode(500, 5500, 600, CounterRng::derive(0xC7B, i));
    for (int l = 0; l < kNumLanes; ++l)
      for (std::int64_t t = 0; t < ep.duration; ++t) mean[l] += ep.rate(l, t);
    for (const auto& a : realize(ep)) count[a.lane] += 1.0;
  }
  double worst_z = 0.0;
  for (int l = 0; l < kNumLanes; ++l) worst_z = std::max(worst_z, std::abs(count[l] - mean[l]) / std::sqrt(mean[l]));
  const bool pass = clamp_failures == 0 && ratio_failures == 0 && worst_z <= 3.0;
  return {pass, fmt("clamp failures %d, ratio failures %d, max per-lane |z| %.2f", clamp_failures, ratio_failures,
                    worst_z)};
}

// 8 -------------------------------------------------------------------------

Outcome criterion8() {
  const Band band{2500, 3500};
  const double fs = measure_saturation_flow();
  const auto mp = evaluate_tuned(ControllerKind::MaxPressure, band, 10, 600, 2024, {}, fs);
  const auto un = evaluate_tuned(ControllerKind::Uniform, band, 10, 600, 2024, {}, fs);
  return {mp.aggregate.mean_travel <= un.aggregate.mean_travel,
          fmt("2500-3500 mean travel: tuned max-pressure %.2f s, tuned uniform %.2f s", mp.aggregate.mean_travel,
              un.aggregate.mean_travel)};
}

// 9, 10 ---------------------------------------------------------------------

constexpr std::int64_t kDefaultSteps = 2000;
constexpr int kEvalEpisodes = 10;
constexpr std::uint64_t kEvalSeed = 2024;

std::int64_t train_steps() {
  if (const char* s = std::getenv("TSC_ACCEPTANCE_STEPS"); s && *s) return std::max(1L, std::atol(s));
  return kDefaultSteps;
}

PpoConfig desk_config(bool adaptive, double eta, std::uint64_t seed) {
  PpoConfig c = PpoConfig::desk();
  c.adaptive_discounting = adaptive;
  c.eta = eta;
  c.seed = seed;
  return c;
}

ActorCritic<float> train(const PpoConfig& cfg, std::int64_t steps) {
  PpoTrainer trainer(cfg);
  for (std::int64_t i = 0; i < steps; ++i) trainer.learn_step();
  return trainer.model();
}

Outcome criterion9() {
  const auto steps = train_steps();
  const auto t0 = std::chrono::steady_clock::now();
  const auto model = train(desk_config(true, 0.25, 1), steps);
  const double minutes = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 60.0;
  const double fs = measure_saturation_flow();
  int beat_random = 0, beat_uniform = 0;
  std::ostringstream os;
  os << fmt("%lld steps in %.1f min;", static_cast<long long>(steps), minutes);
  for (const auto& band : evaluation_bands()) {
    const auto ppo = evaluate("ppo", greedy_policy_agent(model), band, kEvalEpisodes, 600, kEvalSeed);
    const auto rnd = evaluate("random", random_agent(kEvalSeed), band, kEvalEpisodes, 600, kEvalSeed);
    const auto uni = evaluate_tuned(ControllerKind::Uniform, band, kEvalEpisodes, 600, kEvalSeed, {}, fs);
    const double w = ppo.aggregate.mean_wait;
    beat_random += w < rnd.aggregate.mean_wait;
    beat_uniform += w < uni.aggregate.mean_wait;
    os << fmt(" %s ppo %.1f / random %.1f / uniform %.1f;", band.label().c_str(), w, rnd.aggregate.mean_wait,
              uni.aggregate.mean_wait);
  }
  os << fmt(" beats random on %d/5, tuned uniform on %d/5", beat_random, beat_uniform);
  return {beat_random == 5 && beat_uniform >= 3 && minutes <= 120.0, os.str()};
}

Outcome criterion10() {
  const auto steps = train_steps();
  const Band high{4500, 5500};
  double ad = 0.0, per_step = 0.0;
  std::ostringstream os;
  for (std::uint64_t seed : {1, 2}) {
    const auto a = evaluate("ad", greedy_policy_agent(train(desk_config(true, 0.0, seed), steps)), high,
                            kEvalEpisodes, 600, kEvalSeed);
    const auto x = evaluate("x", greedy_policy_agent(train(desk_config(false, 0.0, seed), steps)), high,
                            kEvalEpisodes, 600, kEvalSeed);
    ad += a.aggregate.mean_wait / 2.0;
    per_step += x.aggregate.mean_wait / 2.0;
    os << fmt("seed %llu: [ad] %.1f s, [x] %.1f s; ", static_cast<unsigned long long>(seed), a.aggregate.mean_wait,
              x.aggregate.mean_wait);
  }
  os << fmt("mean over seeds on 4500-5500: [ad]+[eta=0] %.1f s vs [x]+[eta=0] %.1f s", ad, per_step);
  return {ad < per_step, os.str()};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"return equivalence under adaptive discounting", criterion1},
      {"GAE matches direct summation", criterion2},
      {"PPO loss gradient check", criterion3},
      {"eta-bound closed forms vs brute force", criterion4},
      {"simulator conservation and safety", criterion5},
      {"state encoding contract", criterion6},
      {"demand sampler", criterion7},
      {"tuned max-pressure <= tuned uniform at 2500-3500", criterion8},
      {"PPO beats random on 5/5 bands and tuned uniform on >= 3/5", criterion9},
      {"[ad]+[eta=0] beats [x]+[eta=0] on 4500-5500", criterion10},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", out.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                out.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !out.pass;
  }
  return failed == 0 ? 0 : 1;
}
