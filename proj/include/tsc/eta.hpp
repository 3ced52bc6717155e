#pragma once

// Admissible range of the equity exponent eta from two boundary scenarios,
// plus an explicit release-schedule simulator that checks the closed forms.

#include <cmath>
#include <limits>
#include <stdexcept>

namespace tsc::eta {

struct BoundInputs {
  double gamma = 0.98;
  double free_flow_time = 10.8;   // T_free, s
  double saturation_flow = 0.5;   // F_s, veh/s
  double transition_time = 5.0;   // T_yr, s

  void validate() const {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::domain_error("eta: gamma must be in (0,1)");
    if (!(free_flow_time > 0.0) || !(saturation_flow > 0.0) || !(transition_time > 0.0))
      throw std::domain_error("eta: T_free, F_s and T_yr must be positive");
  }
};

struct Bound {
  double upper_scenario1 = 0.0;
  double lower_scenario2 = 0.0;  // +inf when no eta satisfies the release condition
  bool feasible = false;
};

/// Largest eta (exclusive) for which releasing a lone vehicle now beats
/// releasing it one second later: tau^eta > gamma (tau+1)^eta.
inline double scenario1_upper(double gamma, double tau) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::domain_error("scenario1_upper: gamma must be in (0,1)");
  if (!(tau > 0.0)) throw std::domain_error("scenario1_upper: tau must be positive");
  return std::log(gamma) / std::log(tau / (tau + 1.0));
}

struct Scenario2Returns {
  double efficiency = 0.0;       // G_e: saturated lane kept green forever
  double sup_equity = 0.0;       // sup G_e+e: lone vehicle released at travel time tau
  double margin() const noexcept { return sup_equity - efficiency; }
};

inline Scenario2Returns returns_scenario2(double eta, const BoundInputs& in, double tau) {
  in.validate();
  if (!(tau > 0.0)) throw std::domain_error("returns_scenario2: tau must be positive");
  const double step = std::pow(in.gamma, 1.0 / in.saturation_flow);
  const double free = std::pow(in.free_flow_time, eta);
  Scenario2Returns r;
  r.efficiency = free / (1.0 - step);
  r.sup_equity = free + std::pow(tau, eta) * std::pow(in.gamma, in.transition_time) +
                 std::pow(in.free_flow_time + 2.0 * in.transition_time + 1.0, eta) *
                     std::pow(in.gamma, 2.0 * in.transition_time + 1.0) / (1.0 - step);
  return r;
}

/// Smallest eta >= 0 with G_e < sup G_e+e at tau (bisection to `tol`), and the
/// scenario-1 upper bound at the same tau.
inline Bound solve_eta_range(const BoundInputs& in, double tau_release, double tol = 1e-6) {
  in.validate();
  if (!(tau_release > in.free_flow_time)) throw std::domain_error("solve_eta_range: tau must exceed T_free");
  Bound b;
  b.upper_scenario1 = scenario1_upper(in.gamma, tau_release);
  auto ok = [&](double e) { return returns_scenario2(e, in, tau_release).margin() > 0.0; };
  if (ok(0.0)) {
    b.lower_scenario2 = 0.0;
  } else {
    double lo = 0.0;
    double hi = 0.125;
    while (!ok(hi)) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1024.0) {
        b.lower_scenario2 = std::numeric_limits<double>::infinity();
        return b;
      }
    }
    while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      (ok(mid) ? hi : lo) = mid;
    }
    b.lower_scenario2 = hi;
  }
  b.feasible = b.lower_scenario2 < b.upper_scenario1;
  return b;
}

enum class ReleasePolicy { NeverRelease, ReleaseAtTau };

/// Horizon (s) after which gamma^t drops below `eps`.
inline double horizon_for(double gamma, double eps = 1e-15) { return std::log(eps) / std::log(gamma); }

/// Sums discounted rewards of the idealized schedule event by event up to
/// `horizon` seconds: the saturated lane discharges one vehicle every 1/F_s
/// seconds worth T_free^eta; under ReleaseAtTau the lane turns yellow at t=0
/// (its head vehicle still clears), the lone vehicle with travel time tau
/// clears at T_yr, and the saturated lane resumes at 2 T_yr + 1.
inline double brute_force_returns(double eta, const BoundInputs& in, ReleasePolicy policy, double tau,
                                  double horizon) {
  in.validate();
  if (!(std::pow(in.gamma, horizon) < 1e-9)) throw std::domain_error("brute_force_returns: horizon too short");
  const double headway = 1.0 / in.saturation_flow;
  const double reward = std::pow(in.free_flow_time, eta);
  double total = 0.0;
  double resume = 0.0;
  if (policy == ReleasePolicy::ReleaseAtTau) {
    total += reward;
    total += std::pow(tau, eta) * std::pow(in.gamma, in.transition_time);
    resume = 2.0 * in.transition_time + 1.0;
  }
  for (long k = 0;; ++k) {
    const double t = resume + static_cast<double>(k) * headway;
    if (t > horizon) break;
    total += reward * std::pow(in.gamma, t);
  }
  return total;
}

}  // namespace tsc::eta
