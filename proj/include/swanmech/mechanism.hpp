#pragma once

#include <cmath>
#include <memory>
#include <utility>

#include "swanmech/economy.hpp"
#include "swanmech/optimizer.hpp"
#include "swanmech/quote.hpp"
#include "swanmech/types.hpp"

namespace swanmech {

// Floor for the incentive ratio when the optimal welfare is not positive; the
// limit tau -> 0+ keeps the payoff ordering while making incentive spend
// negligible.
inline constexpr double kTauFloor = 1e-9;

inline HeterogeneityBranch scenario_branch(const Scenario& s) {
  const double d_last = static_cast<double>(s.types.back().data_size);
  return s.params.client_variance <= s.params.dg2() / d_last + kBoundaryTol
             ? HeterogeneityBranch::Low
             : HeterogeneityBranch::High;
}

// SWAN prices and rewards around the solved optimum:
//   p(K)   = U(eps(K)) - tau [Theta(K) - L0]
//   r_i(K) = C_i - U(eps(K)) + tau [Theta(K) - L0]
// with Theta the corner interpolation theta in the low-heterogeneity branch
// and the Lagrangian L itself in the high one. Rewards may be negative.
inline MechanismQuote swan_quote(const Scenario& scenario, const SolveResult& solve,
                                 const LagrangianContext& ctx,
                                 double tau_floor = kTauFloor) {
  MechanismQuote q;
  q.name = "swan";
  q.branch = scenario_branch(scenario);
  q.L_floor = ctx.L_floor;

  const auto shared_ctx = std::make_shared<const LagrangianContext>(ctx);
  const bool low = q.branch == HeterogeneityBranch::Low;
  auto theta_or_l = [scenario, shared_ctx, low](const SocialState& st) {
    return low ? theta(st, *shared_ctx, scenario) : lagrangian(st, *shared_ctx, scenario);
  };

  if (solve.w_star > 0.0) {
    SocialState star{solve.k_star, solve.b_star};
    const double l_star = lagrangian(star, ctx, scenario);
    const double gap = l_star - ctx.L_floor;
    if (std::abs(gap) <= kBoundaryTol * std::max(1.0, std::abs(l_star)))
      throw DegenerateError("flat potential: L(K*) equals the Lagrangian floor");
    q.tau = (solve.w_star / static_cast<double>(scenario.total_population())) / gap;
  } else {
    q.tau = tau_floor;
  }

  const double tau = q.tau;
  const double floor = ctx.L_floor;
  q.price_fn = [scenario, theta_or_l, tau, floor](const SocialState& st) {
    return utility_at(st, scenario) - tau * (theta_or_l(st) - floor);
  };
  q.reward_fn = [scenario, theta_or_l, tau, floor](const SocialState& st, int i) {
    return scenario.types[static_cast<size_t>(i)].cost - utility_at(st, scenario) +
           tau * (theta_or_l(st) - floor);
  };
  q.potential_fn = [theta_or_l, tau, floor](const SocialState& st) {
    return tau * (theta_or_l(st) - floor);
  };
  return q;
}

// Benchmark adapted from fixed-reward FL mechanisms: the price tracks the
// model utility and every type receives the same flat participation reward.
inline MechanismQuote modified_fl_quote(const Scenario& scenario, double fixed_reward) {
  MechanismQuote q;
  q.name = "modified_fl";
  q.branch = scenario_branch(scenario);
  q.price_fn = [scenario](const SocialState& st) { return utility_at(st, scenario); };
  q.reward_fn = [fixed_reward](const SocialState&, int) { return fixed_reward; };
  return q;
}

// p = 0, r = 0: the raw game without platform intervention.
inline MechanismQuote zero_quote(const Scenario& scenario) {
  MechanismQuote q;
  q.name = "zero";
  q.branch = scenario_branch(scenario);
  q.price_fn = [](const SocialState&) { return 0.0; };
  q.reward_fn = [](const SocialState&, int) { return 0.0; };
  return q;
}

} // namespace swanmech
