#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include "swanmech/economy.hpp"
#include "swanmech/quote.hpp"
#include "swanmech/types.hpp"

namespace swanmech {

struct TraceRow {
  int round = 0;
  std::int64_t client = 0;
  int type = 0;
  Strategy from = Strategy::Abstain;
  Strategy to = Strategy::Abstain;
  double potential = 0.0;
};

struct DeviationWitness {
  std::int64_t client = 0;
  Strategy from = Strategy::Abstain;
  Strategy to = Strategy::Abstain;
  double gain = 0.0;
};

struct NashCheck {
  bool is_nash = true;
  std::int64_t deviations_checked = 0;
  std::optional<DeviationWitness> witness;
};

struct EquilibriumResult {
  StrategyProfile final_profile;
  bool converged = false;
  int rounds = 0;
  bool nash_verified = false;
  SocialState state;
  WelfareReport welfare;
  std::int64_t deviations_checked = 0;
  std::optional<DeviationWitness> witness;
};

namespace detail {

// Payoff of client n if it played `s`, others unchanged. Buying requires some
// other participant; an infeasible option reports no value.
inline std::optional<double> option_payoff(std::int64_t n, Strategy s,
                                           StrategyProfile& profile,
                                           const MechanismQuote& quote,
                                           const Scenario& scenario) {
  const Strategy saved = profile.strategies[static_cast<size_t>(n)];
  if (s == Strategy::Buy) {
    std::int64_t others = 0;
    for (size_t m = 0; m < profile.strategies.size(); ++m)
      if (static_cast<std::int64_t>(m) != n && profile.strategies[m] == Strategy::Join)
        ++others;
    if (others == 0) return std::nullopt;
  }
  profile.strategies[static_cast<size_t>(n)] = s;
  const double v = payoff(n, profile, quote, scenario);
  profile.strategies[static_cast<size_t>(n)] = saved;
  return v;
}

// Best response with indifference broken toward J, then B, then A.
inline Strategy best_response(std::int64_t n, StrategyProfile& profile,
                              const MechanismQuote& quote, const Scenario& scenario) {
  const Strategy order[3] = {Strategy::Join, Strategy::Buy, Strategy::Abstain};
  double best = -kInf;
  double values[3] = {-kInf, -kInf, -kInf};
  bool feasible[3] = {false, false, false};
  for (int o = 0; o < 3; ++o) {
    if (auto v = option_payoff(n, order[o], profile, quote, scenario)) {
      values[o] = *v;
      feasible[o] = true;
      best = std::max(best, *v);
    }
  }
  for (int o = 0; o < 3; ++o)
    if (feasible[o] && values[o] >= best - kPayoffTol) return order[o];
  return Strategy::Abstain;
}

} // namespace detail

// Exhaustive unilateral-deviation check at the given profile.
inline NashCheck verify_nash(const Scenario& scenario, const MechanismQuote& quote,
                             const StrategyProfile& profile) {
  profile.induced_state(scenario).validate(scenario);
  NashCheck check;
  StrategyProfile work = profile;
  const std::int64_t n_clients = scenario.total_population();
  for (std::int64_t n = 0; n < n_clients; ++n) {
    const Strategy cur = work.strategies[static_cast<size_t>(n)];
    const double cur_payoff = *detail::option_payoff(n, cur, work, quote, scenario);
    for (Strategy alt : {Strategy::Abstain, Strategy::Join, Strategy::Buy}) {
      if (alt == cur) continue;
      const auto v = detail::option_payoff(n, alt, work, quote, scenario);
      if (!v.has_value()) continue;
      ++check.deviations_checked;
      if (*v > cur_payoff + kPayoffTol) {
        check.is_nash = false;
        if (!check.witness)
          check.witness = DeviationWitness{n, cur, alt, *v - cur_payoff};
      }
    }
  }
  return check;
}

// Seeded best-response dynamics: every pass visits the clients in a fresh
// random order and applies strict best responses until a full pass changes
// nothing (or max_rounds passes elapse), then verifies Nash exhaustively.
inline EquilibriumResult best_response_dynamics(const Scenario& scenario,
                                                const MechanismQuote& quote,
                                                const StrategyProfile& initial,
                                                int max_rounds, std::uint64_t rng_seed,
                                                std::vector<TraceRow>* trace = nullptr) {
  initial.induced_state(scenario).validate(scenario);
  EquilibriumResult result;
  result.final_profile = initial;
  StrategyProfile& profile = result.final_profile;

  const std::int64_t n_clients = scenario.total_population();
  std::vector<std::int64_t> order(static_cast<size_t>(n_clients));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(rng_seed);

  for (int round = 1; round <= max_rounds; ++round) {
    std::shuffle(order.begin(), order.end(), rng);
    bool changed = false;
    for (std::int64_t n : order) {
      const Strategy cur = profile.strategies[static_cast<size_t>(n)];
      const Strategy next = detail::best_response(n, profile, quote, scenario);
      if (next == cur) continue;
      profile.strategies[static_cast<size_t>(n)] = next;
      changed = true;
      if (trace) {
        TraceRow row;
        row.round = round;
        row.client = n;
        row.type = scenario.client_type(n);
        row.from = cur;
        row.to = next;
        row.potential = quote.has_potential()
                            ? quote.potential(profile.induced_state(scenario))
                            : 0.0;
        trace->push_back(row);
      }
    }
    result.rounds = round;
    if (!changed) {
      result.converged = true;
      break;
    }
  }

  result.state = profile.induced_state(scenario);
  const NashCheck check = verify_nash(scenario, quote, profile);
  result.nash_verified = check.is_nash;
  result.deviations_checked = check.deviations_checked;
  result.witness = check.witness;
  result.welfare = make_welfare_report(result.state, scenario, &quote);
  return result;
}

} // namespace swanmech
