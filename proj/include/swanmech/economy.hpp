#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "swanmech/error_model.hpp"
#include "swanmech/quote.hpp"
#include "swanmech/types.hpp"

namespace swanmech {

// Model utility at an error value; no model means zero utility.
inline double utility(std::optional<double> eps, const UtilityFunction& u) {
  if (!eps.has_value()) return 0.0;
  return u.value(*eps);
}

inline double utility_at(const SocialState& state, const Scenario& s) {
  return utility(generalization_error(state, s), s.utility);
}

// W_MoTS(K, B) = sum_i [K_i (U - C_i) + B_i U].
inline double welfare_mots(const SocialState& state, const Scenario& s) {
  const double u = utility_at(state, s);
  double w = 0.0;
  for (int i = 0; i < s.type_count(); ++i)
    w += state.participants[i] * (u - s.types[i].cost) + state.buyers[i] * u;
  return w;
}

// W_FL(K) = sum_i K_i (U - C_i); buyers contribute nothing.
inline double welfare_fl(const SocialState& state, const Scenario& s) {
  const double u = utility_at(state, s);
  double w = 0.0;
  for (int i = 0; i < s.type_count(); ++i)
    w += state.participants[i] * (u - s.types[i].cost);
  return w;
}

// [sum_i K_i r_i - sum_i B_i p]^+ with the quote evaluated at `state`.
inline double platform_cost(const SocialState& state, const MechanismQuote& q) {
  const double p = q.price(state);
  double net = 0.0;
  for (size_t i = 0; i < state.participants.size(); ++i)
    net += state.participants[i] * q.reward(state, static_cast<int>(i)) -
           state.buyers[i] * p;
  return net > 0.0 ? net : 0.0;
}

// Payoff of client n under the profile, with price/reward evaluated at the
// profile's induced state.
inline double payoff(std::int64_t n, const StrategyProfile& profile,
                     const MechanismQuote& q, const Scenario& s) {
  const Strategy sn = profile.strategies[static_cast<size_t>(n)];
  if (sn == Strategy::Abstain) return 0.0; // zero in every profile, valid or not
  const SocialState state = profile.induced_state(s);
  state.validate(s);
  const int i = s.client_type(n);
  const double u = utility_at(state, s);
  if (sn == Strategy::Join) return u - s.types[i].cost + q.reward(state, i);
  return u - q.price(state);
}

struct WelfareReport {
  double w_mots = 0.0;
  double w_fl = 0.0;
  double platform_cost = 0.0;
  std::vector<double> client_payoffs; // representative payoff per type
};

// Summary at a state; client_payoffs[i] is the payoff of a type-i client under
// the strategy most of that type plays (J if any participate, else B, else A).
inline WelfareReport make_welfare_report(const SocialState& state, const Scenario& s,
                                         const MechanismQuote* q) {
  WelfareReport r;
  r.w_mots = welfare_mots(state, s);
  r.w_fl = welfare_fl(state, s);
  const double u = utility_at(state, s);
  const double p = q ? q->price(state) : 0.0;
  r.client_payoffs.resize(static_cast<size_t>(s.type_count()), 0.0);
  double net = 0.0;
  for (int i = 0; i < s.type_count(); ++i) {
    const double reward = q ? q->reward(state, i) : 0.0;
    net += state.participants[i] * reward - state.buyers[i] * p;
    if (state.participants[i] > 0)
      r.client_payoffs[static_cast<size_t>(i)] = u - s.types[i].cost + reward;
    else if (state.buyers[i] > 0)
      r.client_payoffs[static_cast<size_t>(i)] = u - p;
  }
  r.platform_cost = q && net > 0.0 ? net : 0.0;
  return r;
}

// Numeric check of the curvature assumption (eps - sigma^2) U'' + 2 U' >= 0 on
// a grid over the reachable error range; violations are reported, not fatal.
inline std::vector<std::string> validate_curvature(const Scenario& s, double eps_lo,
                                                   double eps_hi, int grid = 1000) {
  std::vector<std::string> warnings;
  if (!(eps_lo > 0.0) || !(eps_hi > eps_lo)) return warnings;
  const double s2 = s.params.client_variance;
  int bad = 0;
  double first_bad = 0.0;
  for (int g = 0; g <= grid; ++g) {
    const double eps = eps_lo + (eps_hi - eps_lo) * g / grid;
    if (std::abs(eps - s2) < kBoundaryTol) continue;
    const double lhs = (eps - s2) * s.utility.second_deriv(eps) + 2.0 * s.utility.deriv(eps);
    if (lhs < -kBoundaryTol) {
      if (bad == 0) first_bad = eps;
      ++bad;
    }
  }
  if (bad > 0)
    warnings.push_back("utility curvature condition fails at " + std::to_string(bad) +
                       " of " + std::to_string(grid + 1) + " grid points (first at eps=" +
                       std::to_string(first_bad) + ")");
  return warnings;
}

} // namespace swanmech
