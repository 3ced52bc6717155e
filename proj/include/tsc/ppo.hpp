#pragma once

// PPO with elapsed-time (adaptive) discounting: GAE over variable-duration
// decisions, clipped surrogate loss with closed-form gradients, and
// deterministic multi-actor rollout collection.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "tsc/demand.hpp"
#include "tsc/env.hpp"
#include "tsc/mlp.hpp"
#include "tsc/rng.hpp"

namespace tsc {

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Advantage estimation

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> targets;  // V(s_t) + A_t
};

/// Truncated GAE over one segment of K decisions.
///   delta_t = r_t + gamma^{dt_t} V(s_{t+1}) - V(s_t)
///   A_t     = delta_t + (gamma lambda)^{dt_t} A_{t+1},   A_K = 0
/// `values` has K+1 entries; the last is the bootstrap V(s_K). A done flag at t
/// zeroes both V(s_{t+1}) and A_{t+1}.
inline GaeResult gae_adaptive(std::span<const double> rewards, std::span<const double> values,
                              std::span<const int> delta_ts, double gamma, double lambda,
                              std::span<const std::uint8_t> dones = {}) {
  const std::size_t k = rewards.size();
  if (values.size() != k + 1 || delta_ts.size() != k || (!dones.empty() && dones.size() != k))
    throw std::invalid_argument("gae_adaptive: inconsistent input lengths");
  if (!(gamma > 0.0 && gamma < 1.0) || !(lambda > 0.0 && lambda <= 1.0))
    throw std::domain_error("gae_adaptive: gamma, lambda must be in (0,1)");
  for (std::size_t i = 0; i < k; ++i)
    if (!std::isfinite(rewards[i]) || !std::isfinite(values[i])) throw NumericError("gae_adaptive: non-finite input");
  if (!std::isfinite(values[k])) throw NumericError("gae_adaptive: non-finite bootstrap");

  GaeResult out;
  out.advantages.assign(k, 0.0);
  out.targets.assign(k, 0.0);
  double next_adv = 0.0;
  for (std::size_t i = k; i-- > 0;) {
    const bool terminal = !dones.empty() && dones[i];
    const double dt = static_cast<double>(delta_ts[i]);
    const double next_value = terminal ? 0.0 : values[i + 1];
    const double delta = rewards[i] + std::pow(gamma, dt) * next_value - values[i];
    const double adv = delta + (terminal ? 0.0 : std::pow(gamma * lambda, dt) * next_adv);
    out.advantages[i] = adv;
    out.targets[i] = values[i] + adv;
    next_adv = adv;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Networks

template <typename Scalar>
struct ActorCritic {
  Mlp<Scalar> policy;
  Mlp<Scalar> value;

  static ActorCritic make(int input, const std::vector<int>& hidden, int actions, CounterRng& rng) {
    std::vector<int> ps{input};
    ps.insert(ps.end(), hidden.begin(), hidden.end());
    std::vector<int> vs = ps;
    ps.push_back(actions);
    vs.push_back(1);
    ActorCritic ac{Mlp<Scalar>(ps), Mlp<Scalar>(vs)};
    ac.policy.initialize(rng, 0.01);
    ac.value.initialize(rng, 1.0);
    return ac;
  }

  template <typename Other>
  ActorCritic<Other> cast() const {
    return {policy.template cast<Other>(), value.template cast<Other>()};
  }
};

/// Column-wise log-softmax of logits (actions x batch).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> log_softmax(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& logits) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(logits.rows(), logits.cols());
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    const Scalar m = logits.col(j).maxCoeff();
    const Scalar lse = m + std::log((logits.col(j).array() - m).exp().sum());
    out.col(j) = logits.col(j).array() - lse;
  }
  return out;
}

inline double entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs)
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

// ---------------------------------------------------------------------------
// Loss

struct PpoCoefficients {
  double clip = 0.2;
  double beta_entropy = 0.01;
  double beta_value = 0.5;
};

struct LossReport {
  double total = 0.0;
  double surrogate = 0.0;  // mean clipped surrogate (maximized)
  double entropy = 0.0;    // mean policy entropy
  double value = 0.0;      // beta_value * mean squared error
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
};

/// Samples are the columns of `states`.
template <typename Scalar>
struct LossInputs {
  const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& states;
  std::span<const int> actions;
  std::span<const double> old_log_probs;
  std::span<const double> advantages;
  std::span<const double> targets;
};

/// Loss = -mean(min(rho A, clip(rho) A)) - beta_e mean(H) + beta_v mean((V - target)^2).
/// When gradient vectors are given they receive d(Loss)/d(params).
template <typename Scalar>
LossReport ppo_loss(const ActorCritic<Scalar>& ac, const LossInputs<Scalar>& in, const PpoCoefficients& c,
                    Eigen::Matrix<Scalar, Eigen::Dynamic, 1>* policy_grad = nullptr,
                    Eigen::Matrix<Scalar, Eigen::Dynamic, 1>* value_grad = nullptr) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index n = in.states.cols();
  if (n == 0) throw std::invalid_argument("ppo_loss: empty batch");
  const double inv_n = 1.0 / static_cast<double>(n);

  typename Mlp<Scalar>::Cache pc, vc;
  const Matrix logits = ac.policy.forward(in.states, policy_grad ? &pc : nullptr);
  const Matrix values = ac.value.forward(in.states, value_grad ? &vc : nullptr);
  const Matrix logp = log_softmax<Scalar>(logits);
  const Eigen::Index actions = logits.rows();

  Matrix dlogits = Matrix::Zero(actions, n);
  Matrix dvalues = Matrix::Zero(1, n);
  LossReport r;
  for (Eigen::Index j = 0; j < n; ++j) {
    const int a = in.actions[j];
    const double lp = static_cast<double>(logp(a, j));
    const double ratio = std::exp(lp - in.old_log_probs[j]);
    const double adv = in.advantages[j];
    const double clipped = std::clamp(ratio, 1.0 - c.clip, 1.0 + c.clip);
    const double s1 = ratio * adv;
    const double s2 = clipped * adv;
    r.surrogate += std::min(s1, s2);
    if (s2 < s1) r.clip_fraction += 1.0;
    r.approx_kl += in.old_log_probs[j] - lp;

    double h = 0.0;
    for (Eigen::Index k = 0; k < actions; ++k) {
      const double p = std::exp(static_cast<double>(logp(k, j)));
      h -= p * static_cast<double>(logp(k, j));
    }
    r.entropy += h;

    const double err = static_cast<double>(values(0, j)) - in.targets[j];
    r.value += err * err;

    if (policy_grad) {
      const double surr_scale = s1 <= s2 ? -adv * ratio : 0.0;
      for (Eigen::Index k = 0; k < actions; ++k) {
        const double lpk = static_cast<double>(logp(k, j));
        const double p = std::exp(lpk);
        const double onehot = k == a ? 1.0 : 0.0;
        double g = surr_scale * (onehot - p);
        g += c.beta_entropy * p * (lpk + h);
        dlogits(k, j) = static_cast<Scalar>(g * inv_n);
      }
    }
    if (value_grad) dvalues(0, j) = static_cast<Scalar>(2.0 * c.beta_value * err * inv_n);
  }
  r.surrogate *= inv_n;
  r.entropy *= inv_n;
  r.value *= c.beta_value * inv_n;
  r.clip_fraction *= inv_n;
  r.approx_kl *= inv_n;
  r.total = -r.surrogate - c.beta_entropy * r.entropy + r.value;
  if (!std::isfinite(r.total)) throw NumericError("ppo_loss: non-finite loss");

  if (policy_grad) {
    policy_grad->setZero(ac.policy.parameter_count());
    ac.policy.backward(pc, dlogits, *policy_grad);
  }
  if (value_grad) {
    value_grad->setZero(ac.value.parameter_count());
    ac.value.backward(vc, dvalues, *value_grad);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Configuration

struct PpoConfig {
  std::vector<int> hidden{256, 128};
  double gamma = 0.98;
  double lambda = 0.95;
  int segment_length = 128;  // K
  int actors = 8;
  int threads = 1;
  int epochs = 8;
  int minibatch_size = 256;
  double learning_rate = 2.5e-4;
  double weight_decay = 1e-3;
  PpoCoefficients coeffs{};
  bool normalize_advantages = true;
  bool adaptive_discounting = true;
  double eta = 0.25;
  double reward_scale = 1.0;  // applied to rewards before advantage estimation
  std::int64_t episode_duration = 600;
  double flow_min = 0.0;
  double flow_max = 6000.0;
  std::uint64_t seed = 1;

  void validate() const {
    if (hidden.empty()) throw std::invalid_argument("ppo: at least one hidden layer");
    if (segment_length < 1 || actors < 1 || threads < 1 || epochs < 1 || minibatch_size < 1)
      throw std::invalid_argument("ppo: counts must be positive");
    if (!(coeffs.clip > 0.0)) throw std::invalid_argument("ppo: clip epsilon must be positive");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("ppo: learning rate must be positive");
    if (!(reward_scale > 0.0)) throw std::invalid_argument("ppo: reward scale must be positive");
    RewardConfig{eta, gamma, EquityForm::Power, adaptive_discounting}.validate();
    if (!(lambda > 0.0 && lambda <= 1.0)) throw std::invalid_argument("ppo: lambda must be in (0,1]");
  }

  /// Full-scale preset: 2048/1024 trunks, 32 actors, minibatches of 1000.
  static PpoConfig paper() {
    PpoConfig c;
    c.hidden = {2048, 1024};
    c.actors = 32;
    c.segment_length = 625;
    c.minibatch_size = 1000;
    c.learning_rate = 2.5e-5;
    c.episode_duration = 1200;
    return c;
  }
  /// Desk-scale preset: 256/128 trunks, 8 actors, 600 s episodes.
  static PpoConfig desk() {
    PpoConfig c;
    c.segment_length = 256;
    c.lambda = 0.99;
    c.reward_scale = 0.1;
    return c;
  }
};

// ---------------------------------------------------------------------------
// Rollouts

using EpisodeSampler = std::function<DemandEpisode(std::uint64_t seed)>;

struct RolloutWorker {
  int index = 0;
  Env env;
  CounterRng action_rng;
  std::uint64_t base_seed = 0;
  std::uint64_t episodes_started = 0;
  double episode_return = 0.0;
  std::vector<double> finished_returns;

  void start_episode(const EpisodeSampler& sampler) {
    const auto seed = CounterRng::derive(base_seed, episodes_started++);
    env.reset(sampler(seed));
    episode_return = 0.0;
  }
};

inline std::vector<RolloutWorker> make_workers(int count, std::uint64_t seed, const SimParams& sim,
                                               const RewardConfig& reward, const EpisodeSampler& sampler) {
  std::vector<RolloutWorker> workers;
  workers.reserve(count);
  for (int i = 0; i < count; ++i) {
    RolloutWorker w{i, Env(sim, reward), CounterRng(CounterRng::derive(seed, 0xAC7000 + i)),
                    CounterRng::derive(seed, 0xE9000 + i)};
    w.start_episode(sampler);
    workers.push_back(std::move(w));
  }
  return workers;
}

/// Samples, in canonical (actor, step) order.
struct RolloutBatch {
  int actors = 0;
  int steps = 0;
  Eigen::MatrixXf states;  // kStateDim x (actors * steps)
  std::vector<int> actions;
  std::vector<double> rewards;
  std::vector<int> delta_ts;
  std::vector<std::uint8_t> dones;
  std::vector<double> values;
  std::vector<double> log_probs;
  std::vector<double> bootstrap;  // V(s_K) per actor, 0 if the segment ended on a terminal step
  std::vector<double> advantages;
  std::vector<double> targets;
  std::vector<double> finished_returns;

  std::size_t size() const noexcept { return actions.size(); }
};

template <typename Scalar>
struct PolicyOutput {
  std::array<double, kNumPhases> probs{};
  double value = 0.0;
};

template <typename Scalar>
PolicyOutput<Scalar> evaluate_policy(const ActorCritic<Scalar>& ac, const StateVector& s) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Matrix x(kStateDim, 1);
  for (int i = 0; i < kStateDim; ++i) x(i, 0) = static_cast<Scalar>(s[i]);
  const Matrix lp = log_softmax<Scalar>(ac.policy.forward(x));
  PolicyOutput<Scalar> out;
  for (int k = 0; k < kNumPhases; ++k) out.probs[k] = std::exp(static_cast<double>(lp(k, 0)));
  out.value = static_cast<double>(ac.value.forward(x)(0, 0));
  return out;
}

inline int sample_action(const std::array<double, kNumPhases>& probs, CounterRng& rng) {
  const double u = rng.uniform();
  double c = 0.0;
  for (int k = 0; k < kNumPhases; ++k) {
    c += probs[k];
    if (u < c) return k;
  }
  return kNumPhases - 1;
}

template <typename Scalar>
int greedy_action(const ActorCritic<Scalar>& ac, const StateVector& s) {
  const auto out = evaluate_policy(ac, s);
  return static_cast<int>(std::max_element(out.probs.begin(), out.probs.end()) - out.probs.begin());
}

/// Action chooser used by collect_rollouts; defaults to sampling the policy.
using ActionOverride = std::function<int(const RolloutWorker&, const std::array<double, kNumPhases>& probs)>;

namespace detail {

template <typename Scalar>
void collect_segment(RolloutWorker& w, const ActorCritic<Scalar>& ac, int steps, const EpisodeSampler& sampler,
                     double reward_scale, const ActionOverride& chooser, RolloutBatch& batch, int column) {
  w.finished_returns.clear();
  for (int t = 0; t < steps; ++t) {
    if (w.env.done()) w.start_episode(sampler);
    const auto& s = w.env.state();
    const auto out = evaluate_policy(ac, s);
    const int a = chooser ? chooser(w, out.probs) : sample_action(out.probs, w.action_rng);
    const int idx = column + t;
    for (int i = 0; i < kStateDim; ++i) batch.states(i, idx) = s[i];
    const Transition tr = w.env.step(a);
    batch.actions[idx] = a;
    batch.rewards[idx] = tr.reward * reward_scale;
    batch.delta_ts[idx] = tr.delta_t;
    batch.dones[idx] = tr.done ? 1 : 0;
    batch.values[idx] = out.value;
    batch.log_probs[idx] = std::log(std::max(out.probs[a], 1e-300));
    w.episode_return += tr.reward;
    if (tr.done) w.finished_returns.push_back(w.episode_return);
  }
  batch.bootstrap[w.index] = w.env.done() ? 0.0 : evaluate_policy(ac, w.env.state()).value;
}

}  // namespace detail

/// Runs every worker for `steps` decisions and computes adaptive GAE per
/// segment. Workers are split over `threads` threads; results do not depend
/// on the thread count. A failing worker is restarted on a fresh episode and
/// retried once.
template <typename Scalar>
RolloutBatch collect_rollouts(std::vector<RolloutWorker>& workers, const ActorCritic<Scalar>& ac, int steps,
                              const EpisodeSampler& sampler, const PpoConfig& cfg,
                              const ActionOverride& chooser = {}) {
  const int n = static_cast<int>(workers.size());
  RolloutBatch batch;
  batch.actors = n;
  batch.steps = steps;
  const auto total = static_cast<std::size_t>(n) * steps;
  batch.states.resize(kStateDim, static_cast<Eigen::Index>(total));
  batch.actions.assign(total, 0);
  batch.rewards.assign(total, 0.0);
  batch.delta_ts.assign(total, 1);
  batch.dones.assign(total, 0);
  batch.values.assign(total, 0.0);
  batch.log_probs.assign(total, 0.0);
  batch.bootstrap.assign(n, 0.0);

  auto run = [&](int i) {
    try {
      detail::collect_segment(workers[i], ac, steps, sampler, cfg.reward_scale, chooser, batch, i * steps);
    } catch (const std::exception&) {
      workers[i].start_episode(sampler);
      detail::collect_segment(workers[i], ac, steps, sampler, cfg.reward_scale, chooser, batch, i * steps);
    }
  };
  const int threads = std::clamp(cfg.threads, 1, std::max(1, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) run(i);
  } else {
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (int i = t; i < n; i += threads) run(i);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  batch.advantages.assign(total, 0.0);
  batch.targets.assign(total, 0.0);
  std::vector<int> ones(steps, 1);
  for (int i = 0; i < n; ++i) {
    const std::size_t off = static_cast<std::size_t>(i) * steps;
    std::vector<double> values(batch.values.begin() + off, batch.values.begin() + off + steps);
    values.push_back(batch.bootstrap[i]);
    const std::span<const int> dts = cfg.adaptive_discounting
                                         ? std::span<const int>(batch.delta_ts.data() + off, steps)
                                         : std::span<const int>(ones);
    const auto g = gae_adaptive(std::span<const double>(batch.rewards.data() + off, steps), values, dts, cfg.gamma,
                                cfg.lambda, std::span<const std::uint8_t>(batch.dones.data() + off, steps));
    std::copy(g.advantages.begin(), g.advantages.end(), batch.advantages.begin() + off);
    std::copy(g.targets.begin(), g.targets.end(), batch.targets.begin() + off);
    batch.finished_returns.insert(batch.finished_returns.end(), workers[i].finished_returns.begin(),
                                  workers[i].finished_returns.end());
  }
  return batch;
}

inline void normalize(std::vector<double>& x) {
  if (x.empty()) return;
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(x.size()));
  for (double& v : x) v = sd > 1e-12 ? (v - mean) / sd : 0.0;
}

// ---------------------------------------------------------------------------
// Update

struct UpdateReport {
  LossReport last{};
  double mean_surrogate = 0.0;
  double mean_entropy = 0.0;
  double mean_value_loss = 0.0;
  double mean_clip_fraction = 0.0;
  double mean_approx_kl = 0.0;
  int minibatches = 0;
};

template <typename Scalar>
struct Optimizers {
  Adam<Scalar> policy;
  Adam<Scalar> value;

  static Optimizers make(const ActorCritic<Scalar>& ac, const PpoConfig& cfg) {
    AdamConfig a;
    a.learning_rate = cfg.learning_rate;
    a.weight_decay = cfg.weight_decay;
    return {Adam<Scalar>(ac.policy.parameter_count(), a), Adam<Scalar>(ac.value.parameter_count(), a)};
  }
};

/// Clipped-surrogate epochs over shuffled minibatches.
template <typename Scalar>
UpdateReport ppo_update(const RolloutBatch& batch, ActorCritic<Scalar>& ac, Optimizers<Scalar>& opt,
                        const PpoConfig& cfg, CounterRng& rng) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const std::size_t n = batch.size();
  std::vector<double> adv = batch.advantages;
  if (cfg.normalize_advantages) normalize(adv);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t mb = std::min<std::size_t>(static_cast<std::size_t>(cfg.minibatch_size), n);

  UpdateReport rep;
  Matrix states;
  std::vector<int> actions;
  std::vector<double> old_lp, a_mb, tgt;
  Vector gp, gv;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    for (std::size_t start = 0; start + mb <= n; start += mb) {
      states.resize(kStateDim, static_cast<Eigen::Index>(mb));
      actions.resize(mb);
      old_lp.resize(mb);
      a_mb.resize(mb);
      tgt.resize(mb);
      for (std::size_t j = 0; j < mb; ++j) {
        const std::size_t s = order[start + j];
        states.col(static_cast<Eigen::Index>(j)) = batch.states.col(static_cast<Eigen::Index>(s)).cast<Scalar>();
        actions[j] = batch.actions[s];
        old_lp[j] = batch.log_probs[s];
        a_mb[j] = adv[s];
        tgt[j] = batch.targets[s];
      }
      const LossInputs<Scalar> in{states, actions, old_lp, a_mb, tgt};
      LossReport r;
      try {
        r = ppo_loss(ac, in, cfg.coeffs, &gp, &gv);
      } catch (const NumericError& e) {
        std::ostringstream os;
        os << e.what() << " (epoch " << epoch << ", minibatch at " << start << ", optimizer step "
           << opt.policy.steps() << ")";
        throw NumericError(os.str());
      }
      opt.policy.step(ac.policy.parameters(), gp);
      opt.value.step(ac.value.parameters(), gv);
      rep.last = r;
      rep.mean_surrogate += r.surrogate;
      rep.mean_entropy += r.entropy;
      rep.mean_value_loss += r.value;
      rep.mean_clip_fraction += r.clip_fraction;
      rep.mean_approx_kl += r.approx_kl;
      ++rep.minibatches;
    }
  }
  if (rep.minibatches > 0) {
    const double k = 1.0 / rep.minibatches;
    rep.mean_surrogate *= k;
    rep.mean_entropy *= k;
    rep.mean_value_loss *= k;
    rep.mean_clip_fraction *= k;
    rep.mean_approx_kl *= k;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Trainer

struct LearnStepReport {
  std::int64_t step = 0;
  double mean_reward = 0.0;  // per decision, unscaled
  double mean_episode_return = 0.0;
  std::size_t episodes_finished = 0;
  UpdateReport update{};
};

class PpoTrainer {
 public:
  explicit PpoTrainer(PpoConfig cfg, SimParams sim = {}) : cfg_(std::move(cfg)), sim_(sim) {
    cfg_.validate();
    CounterRng init(CounterRng::derive(cfg_.seed, 0x1417));
    model_ = ActorCritic<float>::make(kStateDim, cfg_.hidden, kNumPhases, init);
    opt_ = Optimizers<float>::make(model_, cfg_);
    shuffle_ = CounterRng(CounterRng::derive(cfg_.seed, 0x5A0F));
    const auto lo = cfg_.flow_min, hi = cfg_.flow_max;
    const auto dur = cfg_.episode_duration;
    sampler_ = [lo, hi, dur](std::uint64_t seed) { return sample_episode(lo, hi, dur, seed); };
    const RewardConfig reward{cfg_.eta, cfg_.gamma, EquityForm::Power, cfg_.adaptive_discounting};
    workers_ = make_workers(cfg_.actors, cfg_.seed, sim_, reward, sampler_);
  }

  LearnStepReport learn_step() {
    const RolloutBatch batch = collect_rollouts(workers_, model_, cfg_.segment_length, sampler_, cfg_);
    LearnStepReport rep;
    rep.update = ppo_update(batch, model_, opt_, cfg_, shuffle_);
    rep.step = ++steps_;
    rep.mean_reward = std::accumulate(batch.rewards.begin(), batch.rewards.end(), 0.0) /
                      (cfg_.reward_scale * static_cast<double>(batch.size()));
    rep.episodes_finished = batch.finished_returns.size();
    if (!batch.finished_returns.empty())
      rep.mean_episode_return = std::accumulate(batch.finished_returns.begin(), batch.finished_returns.end(), 0.0) /
                                static_cast<double>(batch.finished_returns.size());
    return rep;
  }

  const ActorCritic<float>& model() const noexcept { return model_; }
  ActorCritic<float>& model() noexcept { return model_; }
  const PpoConfig& config() const noexcept { return cfg_; }
  std::int64_t steps() const noexcept { return steps_; }

 private:
  PpoConfig cfg_;
  SimParams sim_;
  ActorCritic<float> model_;
  Optimizers<float> opt_;
  CounterRng shuffle_;
  EpisodeSampler sampler_;
  std::vector<RolloutWorker> workers_;
  std::int64_t steps_ = 0;
};

// ---------------------------------------------------------------------------
// Checkpoints

inline constexpr int kCheckpointVersion = 1;

template <typename Scalar>
nlohmann::json to_json(const Mlp<Scalar>& net) {
  const auto& p = net.parameters();
  return {{"sizes", net.sizes()}, {"params", std::vector<double>(p.data(), p.data() + p.size())}};
}

template <typename Scalar>
Mlp<Scalar> mlp_from_json(const nlohmann::json& j) {
  Mlp<Scalar> net(j.at("sizes").get<std::vector<int>>());
  const auto params = j.at("params").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(params.size()) != net.parameter_count())
    throw std::invalid_argument("checkpoint: parameter count does not match shape");
  for (std::size_t i = 0; i < params.size(); ++i) net.parameters()[static_cast<Eigen::Index>(i)] = static_cast<Scalar>(params[i]);
  return net;
}

template <typename Scalar>
nlohmann::json checkpoint_json(const ActorCritic<Scalar>& ac, std::int64_t step) {
  return {{"format", "tsc-ppo-checkpoint"},
          {"version", kCheckpointVersion},
          {"learner_step", step},
          {"policy", to_json(ac.policy)},
          {"value", to_json(ac.value)}};
}

template <typename Scalar>
ActorCritic<Scalar> checkpoint_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "tsc-ppo-checkpoint" || j.value("version", 0) != kCheckpointVersion)
    throw std::invalid_argument("checkpoint: unsupported format or version");
  return {mlp_from_json<Scalar>(j.at("policy")), mlp_from_json<Scalar>(j.at("value"))};
}

}  // namespace tsc
