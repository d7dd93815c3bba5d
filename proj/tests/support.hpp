#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "swanmech/economy.hpp"
#include "swanmech/error_model.hpp"
#include "swanmech/optimizer.hpp"
#include "swanmech/types.hpp"

namespace testsupport {

using namespace swanmech;

struct GenOptions {
  int max_types = 4;
  int max_population = 8;
  bool allow_high_heterogeneity = true;
  bool allow_finite_req = true;
};

// Random desk-scale instance with the full-participation error pinned near 1,
// so the steep power utility stays within a numerically comfortable range.
inline Scenario random_scenario(std::mt19937_64& rng, const GenOptions& opt = {}) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Scenario s;
  const int types = 1 + static_cast<int>(rng() % static_cast<unsigned>(opt.max_types));
  std::vector<std::int64_t> sizes;
  for (int i = 0; i < types; ++i)
    sizes.push_back(30 + static_cast<std::int64_t>(rng() % 271));
  std::sort(sizes.begin(), sizes.end());
  const double unit_cost = std::pow(10.0, -4.0 + 2.3 * uni(rng));
  for (int i = 0; i < types; ++i) {
    ClientType t;
    t.index = i + 1;
    t.data_size = sizes[static_cast<size_t>(i)];
    t.population = 1 + static_cast<int>(rng() % static_cast<unsigned>(opt.max_population));
    t.cost = unit_cost * static_cast<double>(t.data_size);
    s.types.push_back(t);
  }

  double weighted = 0.0;
  std::int64_t k_full = 0;
  for (const auto& t : s.types) {
    weighted += static_cast<double>(t.population) / static_cast<double>(t.data_size);
    k_full += t.population;
  }
  const double dg2 = static_cast<double>(k_full * k_full) / weighted;
  s.params.feature_dim = 2 + static_cast<int>(rng() % 19);
  s.params.data_variance = dg2 / s.params.feature_dim;

  const double roll = uni(rng);
  const double d_last = static_cast<double>(s.types.back().data_size);
  if (roll < 0.5) {
    s.params.client_variance = 0.0;
  } else if (roll < 0.75 || !opt.allow_high_heterogeneity) {
    s.params.client_variance = (0.1 + 0.85 * uni(rng)) * dg2 / d_last;
  } else {
    s.params.client_variance = (1.2 + 1.8 * uni(rng)) * dg2 / d_last;
  }

  // eps is jointly homogeneous in (gamma^2, sigma^2); rescale both so the
  // minimum achievable error lands near 1 and the steep utility stays tame.
  const double target = 0.8 + 0.4 * uni(rng);
  const double scale = target / eps_min(s);
  s.params.data_variance *= scale;
  s.params.client_variance *= scale;

  s.utility.kind = UtilityKind::Power;
  s.utility.scale = 40.0;
  s.utility.exponent = (rng() % 3 == 0) ? 8.0 : ((rng() % 2 == 0) ? 12.0 : 16.0);

  s.eps_req = kInf;
  if (opt.allow_finite_req && uni(rng) < 0.5) {
    const double emin = eps_min(s);
    double req = emin * (1.0 + uni(rng));
    if (std::abs(req - s.params.client_variance) < 1e-6) req += 1e-3;
    s.eps_req = req;
  }
  s.validate();
  return s;
}

inline SocialState random_state(std::mt19937_64& rng, const Scenario& s,
                                bool with_buyers = true) {
  SocialState st = SocialState::zeros(s);
  for (int i = 0; i < s.type_count(); ++i)
    st.participants[static_cast<size_t>(i)] =
        static_cast<int>(rng() % static_cast<unsigned>(s.types[static_cast<size_t>(i)].population + 1));
  if (with_buyers && st.total_participants() > 0) {
    for (int i = 0; i < s.type_count(); ++i) {
      const int room = s.types[static_cast<size_t>(i)].population -
                       st.participants[static_cast<size_t>(i)];
      st.buyers[static_cast<size_t>(i)] = room > 0 ? static_cast<int>(rng() % static_cast<unsigned>(room + 1)) : 0;
    }
  }
  return st;
}

inline SocialState random_nonempty_state(std::mt19937_64& rng, const Scenario& s,
                                         bool with_buyers = false) {
  for (;;) {
    SocialState st = random_state(rng, s, with_buyers);
    if (st.total_participants() > 0) return st;
  }
}

inline StrategyProfile random_profile(std::mt19937_64& rng, const Scenario& s) {
  StrategyProfile p = StrategyProfile::all_abstain(s);
  for (auto& strat : p.strategies) {
    const unsigned r = static_cast<unsigned>(rng() % 3);
    strat = r == 0 ? Strategy::Abstain : (r == 1 ? Strategy::Join : Strategy::Buy);
  }
  bool any_join = false;
  for (auto strat : p.strategies) any_join = any_join || strat == Strategy::Join;
  if (!any_join)
    for (auto& strat : p.strategies)
      if (strat == Strategy::Buy) strat = Strategy::Abstain;
  return p;
}

// ---- independent oracles -------------------------------------------------

// eps on the continuous relaxation of the participation counts.
inline double eps_continuous(const std::vector<double>& k, const Scenario& s) {
  double total = 0.0;
  double weighted = 0.0;
  for (size_t i = 0; i < k.size(); ++i) {
    total += k[i];
    weighted += k[i] / static_cast<double>(s.types[i].data_size);
  }
  return s.params.dg2() * weighted / (total * total) +
         (total - 1.0) / total * s.params.client_variance;
}

// Central finite difference of eps in coordinate i.
inline double error_partial_fd(const SocialState& st, const Scenario& s, int i,
                               double h = 1e-4) {
  std::vector<double> k(st.participants.begin(), st.participants.end());
  std::vector<double> hi = k, lo = k;
  hi[static_cast<size_t>(i)] += h;
  lo[static_cast<size_t>(i)] -= h;
  return (eps_continuous(hi, s) - eps_continuous(lo, s)) / (2.0 * h);
}

// theta as the expected Lagrangian over independent all-or-none type lotteries
// with participation probability K_i / N_i.
inline double theta_oracle(const SocialState& st, const LagrangianContext& ctx,
                           const Scenario& s) {
  const int ic = s.type_count();
  double sum = 0.0;
  std::vector<int> outcome(static_cast<size_t>(ic), 0);
  for (unsigned mask = 0; mask < (1u << ic); ++mask) {
    double prob = 1.0;
    SocialState corner = SocialState::zeros(s);
    for (int i = 0; i < ic; ++i) {
      const double p = static_cast<double>(st.participants[static_cast<size_t>(i)]) /
                       static_cast<double>(s.types[static_cast<size_t>(i)].population);
      if ((mask >> i) & 1) {
        prob *= p;
        corner.participants[static_cast<size_t>(i)] = s.types[static_cast<size_t>(i)].population;
      } else {
        prob *= 1.0 - p;
      }
    }
    if (prob == 0.0) continue;
    sum += prob * lagrangian(corner, ctx, s);
  }
  return sum;
}

struct OracleBest {
  bool found = false;
  std::vector<int> k;
  double welfare = 0.0;
  double eps = kInf;
};

// Constrained welfare maximizer by explicit recursion over type counts; the
// same optimum and tie order as the library, from an independent code path.
inline void oracle_recurse(const Scenario& s, size_t depth, std::vector<int>& k,
                           OracleBest& best) {
  if (depth == s.types.size()) {
    std::int64_t ktot = 0;
    double weighted = 0.0;
    for (size_t i = 0; i < k.size(); ++i) {
      ktot += k[i];
      weighted += static_cast<double>(k[i]) / static_cast<double>(s.types[i].data_size);
    }
    double eps = kInf;
    double w = 0.0;
    if (ktot > 0) {
      const double kd = static_cast<double>(ktot);
      eps = s.params.dg2() * weighted / (kd * kd) +
            (kd - 1.0) / kd * s.params.client_variance;
      const double u = s.utility.value(eps);
      for (size_t i = 0; i < k.size(); ++i)
        w += s.types[i].population * u - k[i] * s.types[i].cost;
    }
    if (s.eps_req != kInf && !(eps <= s.eps_req + kBoundaryTol)) return;
    bool take = !best.found;
    if (!take && w > best.welfare) take = true;
    if (!take && w == best.welfare) {
      if (eps < best.eps) take = true;
      else if (eps == best.eps && k < best.k) take = true;
    }
    if (take) {
      best.found = true;
      best.k = k;
      best.welfare = w;
      best.eps = eps;
    }
    return;
  }
  for (int v = 0; v <= s.types[depth].population; ++v) {
    k[depth] = v;
    oracle_recurse(s, depth + 1, k, best);
  }
  k[depth] = 0;
}

inline OracleBest constrained_welfare_oracle(const Scenario& s) {
  OracleBest best;
  std::vector<int> k(s.types.size(), 0);
  oracle_recurse(s, 0, k, best);
  return best;
}

// First index from which the two-type iid error scan is strictly decreasing.
inline std::int64_t ex1_scan_threshold(std::int64_t d1, std::int64_t d2,
                                       std::int64_t k2, std::int64_t kmax = 80) {
  Scenario s;
  s.types.push_back({1, d1, 0.0, static_cast<int>(kmax)});
  s.types.push_back({2, d2, 0.0, static_cast<int>(k2)});
  s.params = {1, 1.0, 0.0};
  std::vector<double> eps;
  for (std::int64_t k1 = 0; k1 <= kmax; ++k1) {
    SocialState st{{static_cast<int>(k1), static_cast<int>(k2)}, {0, 0}};
    eps.push_back(*generalization_error(st, s));
  }
  std::int64_t t = kmax;
  for (std::int64_t i = kmax; i >= 1; --i) {
    if (eps[static_cast<size_t>(i)] < eps[static_cast<size_t>(i - 1)]) t = i - 1;
    else break;
  }
  return t;
}

} // namespace testsupport
