#pragma once

#include <functional>
#include <string>

#include "swanmech/types.hpp"

namespace swanmech {

enum class HeterogeneityBranch { Low, High };

inline const char* branch_name(HeterogeneityBranch b) {
  return b == HeterogeneityBranch::Low ? "low-heterogeneity" : "high-heterogeneity";
}

// Mechanism contract: state-dependent model price and per-type participation
// rewards. The game module consumes only this surface. potential_fn is set for
// mechanisms that induce a potential game (tau * [Theta(K) - L0] for SWAN).
struct MechanismQuote {
  std::string name;
  HeterogeneityBranch branch = HeterogeneityBranch::Low;
  double tau = 0.0;
  double L_floor = 0.0;
  std::function<double(const SocialState&)> price_fn;
  std::function<double(const SocialState&, int)> reward_fn;
  std::function<double(const SocialState&)> potential_fn;

  double price(const SocialState& st) const { return price_fn(st); }
  double reward(const SocialState& st, int type) const { return reward_fn(st, type); }
  bool has_potential() const { return static_cast<bool>(potential_fn); }
  double potential(const SocialState& st) const { return potential_fn(st); }
};

} // namespace swanmech
