#pragma once

// Independent reference computations shared by unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <vector>

#include "tsc/ppo.hpp"

namespace oracle {

/// Textbook GAE with unit time steps by explicit double summation:
/// A_t = sum_{k>=0} (gamma lambda)^k delta_{t+k}, truncated at the segment end.
inline std::vector<double> gae_direct(const std::vector<double>& r, const std::vector<double>& v, double gamma,
                                      double lambda) {
  const std::size_t n = r.size();
  std::vector<double> delta(n);
  for (std::size_t t = 0; t < n; ++t) delta[t] = r[t] + gamma * v[t + 1] - v[t];
  std::vector<double> adv(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    double w = 1.0;
    for (std::size_t k = t; k < n; ++k) {
      adv[t] += w * delta[k];
      w *= gamma * lambda;
    }
  }
  return adv;
}

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
};

/// Compares analytic PPO loss gradients with central differences on every parameter.
inline GradCheck ppo_gradient_check(tsc::ActorCritic<double>& ac, const tsc::LossInputs<double>& in,
                                    const tsc::PpoCoefficients& c, double h = 1e-6) {
  Eigen::VectorXd gp, gv;
  tsc::ppo_loss(ac, in, c, &gp, &gv);
  GradCheck out;
  auto sweep = [&](Eigen::VectorXd& params, const Eigen::VectorXd& analytic) {
    for (Eigen::Index i = 0; i < params.size(); ++i) {
      const double keep = params[i];
      params[i] = keep + h;
      const double up = tsc::ppo_loss(ac, in, c).total;
      params[i] = keep - h;
      const double down = tsc::ppo_loss(ac, in, c).total;
      params[i] = keep;
      const double numeric = (up - down) / (2.0 * h);
      const double scale = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-6});
      out.max_rel_error = std::max(out.max_rel_error, std::abs(numeric - analytic[i]) / scale);
      ++out.checked;
    }
  };
  sweep(ac.policy.parameters(), gp);
  sweep(ac.value.parameters(), gv);
  return out;
}

/// Random small actor-critic problem for the gradient check.
struct GradProblem {
  tsc::ActorCritic<double> ac;
  Eigen::MatrixXd states;
  std::vector<int> actions;
  std::vector<double> old_log_probs, advantages, targets;

  tsc::LossInputs<double> inputs() const { return {states, actions, old_log_probs, advantages, targets}; }
};

inline GradProblem make_grad_problem(std::uint64_t seed, int input = 12, int width = 8, int samples = 20) {
  tsc::CounterRng rng(seed);
  GradProblem p{tsc::ActorCritic<double>::make(input, {width, width}, 4, rng), {}, {}, {}, {}, {}};
  // Undo the small output gain of the training init so the policy is far from uniform.
  p.ac.policy.weight(p.ac.policy.layers() - 1) *= 100.0;
  p.ac.policy.bias(p.ac.policy.layers() - 1).setConstant(0.1);
  for (std::size_t i = 0; i < p.ac.value.layers(); ++i) p.ac.value.bias(i).setConstant(0.05);
  p.states.resize(input, samples);
  for (Eigen::Index j = 0; j < samples; ++j)
    for (Eigen::Index i = 0; i < input; ++i) p.states(i, j) = rng.uniform(-1, 1);
  const Eigen::MatrixXd lp = tsc::log_softmax<double>(p.ac.policy.forward(p.states));
  for (int j = 0; j < samples; ++j) {
    const int a = static_cast<int>(rng.below(4));
    p.actions.push_back(a);
    // Old policy differs so ratios spread over both sides of the clip range.
    p.old_log_probs.push_back(lp(a, j) + rng.uniform(-0.4, 0.4));
    p.advantages.push_back(rng.normal());
    p.targets.push_back(rng.normal());
  }
  return p;
}

}  // namespace oracle
