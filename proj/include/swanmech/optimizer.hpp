#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "swanmech/economy.hpp"
#include "swanmech/error_model.hpp"
#include "swanmech/parallel.hpp"
#include "swanmech/types.hpp"

namespace swanmech {

// Multiplier, requirement constant and cached corner data for the Lagrangian
//   L(K) = sum_i [N_i U(eps) - K_i C_i] + lambda [(eps - s2)^-1 - inv_req].
struct LagrangianContext {
  double lambda = 0.0;
  double eps_req = kInf;
  double inv_req = 0.0;             // (eps_req - sigma^2)^-1, 0 when eps_req = inf
  double L_floor = 0.0;             // inf of L over the whole state box
  std::vector<double> corner_values; // index = bitmask, bit i set -> K_i = N_i
  std::int64_t singular_skipped = 0; // states excluded from the floor scan
  std::int64_t below_sigma2 = 0;     // states with eps < sigma^2 seen in the scan
  bool lambda_ineffective = false;   // penalty cannot enforce the requirement
};

struct SolveResult {
  std::vector<int> k_star;
  std::vector<int> b_star;
  double w_star = 0.0;
  double eps_star = kInf; // +inf for the all-abstain optimum
  bool binding = false;
  double lambda_star = 0.0;
};

namespace detail {

inline std::int64_t state_space_size(const Scenario& s) {
  std::int64_t total = 1;
  for (const auto& t : s.types) {
    total *= t.population + 1;
    if (total > kEnumerationGuard) return total;
  }
  return total;
}

inline void check_guard(const Scenario& s, const char* what) {
  if (state_space_size(s) > kEnumerationGuard)
    throw GuardError(std::string(what) + ": state space exceeds enumeration guard");
}

inline void unrank_state(const Scenario& s, std::int64_t idx, std::vector<int>& k) {
  k.resize(s.types.size());
  for (size_t i = 0; i < s.types.size(); ++i) {
    const int radix = s.types[i].population + 1;
    k[i] = static_cast<int>(idx % radix);
    idx /= radix;
  }
}

inline bool advance_state(const Scenario& s, std::vector<int>& k) {
  for (size_t i = 0; i < k.size(); ++i) {
    if (k[i] < s.types[i].population) {
      ++k[i];
      return true;
    }
    k[i] = 0;
  }
  return false;
}

inline bool lex_less(const std::vector<int>& a, const std::vector<int>& b) {
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

// Incumbent under the deterministic total order: higher objective, then lower
// eps, then lexicographically smaller K.
struct Incumbent {
  bool valid = false;
  double objective = -kInf;
  double eps = kInf;
  std::vector<int> k;

  bool accept(double obj, double e, const std::vector<int>& cand) {
    if (valid) {
      if (obj < objective) return false;
      if (obj == objective) {
        if (e > eps) return false;
        if (e == eps && !lex_less(cand, k)) return false;
      }
    }
    valid = true;
    objective = obj;
    eps = e;
    k = cand;
    return true;
  }

  void merge(const Incumbent& other) {
    if (other.valid) accept(other.objective, other.eps, other.k);
  }
};

inline double full_dissemination_welfare(const std::vector<int>& k, double eps_or_inf,
                                         const Scenario& s) {
  if (eps_or_inf == kInf) return 0.0; // K = 0: no model, nothing to distribute
  const double u = s.utility.value(eps_or_inf);
  double w = 0.0;
  for (int i = 0; i < s.type_count(); ++i)
    w += s.types[i].population * u - k[static_cast<size_t>(i)] * s.types[i].cost;
  return w;
}

inline double state_eps_or_inf(const std::vector<int>& k, const Scenario& s) {
  std::int64_t total = 0;
  double weighted = 0.0;
  for (size_t i = 0; i < k.size(); ++i) {
    total += k[i];
    weighted += static_cast<double>(k[i]) / static_cast<double>(s.types[i].data_size);
  }
  if (total == 0) return kInf;
  const double kd = static_cast<double>(total);
  return s.params.dg2() * weighted / (kd * kd) +
         (kd - 1.0) / kd * s.params.client_variance;
}

inline double raw_lagrangian(const std::vector<int>& k, double eps_or_inf,
                             double lambda, double inv_req, const Scenario& s) {
  if (eps_or_inf == kInf) return -lambda * inv_req;
  const double gap = eps_or_inf - s.params.client_variance;
  if (std::abs(gap) < kBoundaryTol)
    throw SingularError("Lagrangian singular: eps equals sigma^2");
  return full_dissemination_welfare(k, eps_or_inf, s) + lambda * (1.0 / gap - inv_req);
}

inline double requirement_inverse(double eps_req, double sigma2) {
  if (eps_req == kInf) return 0.0;
  const double gap = eps_req - sigma2;
  if (std::abs(gap) < kBoundaryTol)
    throw SingularError("eps_req equals sigma^2: penalty constant is singular");
  return 1.0 / gap;
}

} // namespace detail

// L(K) with the conventions: (eps_req - s2)^-1 = 0 for an infinite requirement
// and (eps - s2)^-1 = 0 at K = 0 (eps = +inf limit).
inline double lagrangian(const SocialState& state, const LagrangianContext& ctx,
                         const Scenario& s) {
  const double eps = detail::state_eps_or_inf(state.participants, s);
  return detail::raw_lagrangian(state.participants, eps, ctx.lambda, ctx.inv_req, s);
}

// Multilinear interpolation of L from the all-or-none corners:
//   theta(K) = sum_{x in prod{0,N_i}} L(x) * prod_i w_i,   w_i = K_i/N_i at
// x_i = N_i and 1 - K_i/N_i at x_i = 0.
inline double theta(const SocialState& state, const LagrangianContext& ctx,
                    const Scenario& s) {
  const int ic = s.type_count();
  for (int i = 0; i < ic; ++i)
    if (state.participants[i] < 0 || state.participants[i] > s.types[i].population)
      throw ScenarioError("theta: K_i out of [0, N_i]");
  double sum = 0.0;
  const size_t corners = ctx.corner_values.size();
  for (size_t mask = 0; mask < corners; ++mask) {
    double w = 1.0;
    for (int i = 0; i < ic; ++i) {
      const double share = static_cast<double>(state.participants[i]) /
                           static_cast<double>(s.types[i].population);
      w *= (mask >> i) & 1 ? share : 1.0 - share;
    }
    sum += ctx.corner_values[mask] * w;
  }
  return sum;
}

// Builds the context at a fixed multiplier: corner table plus the floor
// L0 = inf L over the whole box (singular states skipped and counted).
inline LagrangianContext make_lagrangian_context(const Scenario& s, double lambda) {
  if (s.type_count() > 20) throw GuardError("corner table: too many types");
  detail::check_guard(s, "lagrangian floor");
  LagrangianContext ctx;
  ctx.lambda = lambda;
  ctx.eps_req = s.eps_req;
  ctx.inv_req = detail::requirement_inverse(s.eps_req, s.params.client_variance);

  const int ic = s.type_count();
  ctx.corner_values.resize(static_cast<size_t>(1) << ic);
  std::vector<int> k(static_cast<size_t>(ic), 0);
  for (size_t mask = 0; mask < ctx.corner_values.size(); ++mask) {
    for (int i = 0; i < ic; ++i)
      k[static_cast<size_t>(i)] = (mask >> i) & 1 ? s.types[static_cast<size_t>(i)].population : 0;
    const double eps = detail::state_eps_or_inf(k, s);
    ctx.corner_values[mask] = detail::raw_lagrangian(k, eps, lambda, ctx.inv_req, s);
  }

  struct FloorAcc {
    double floor = kInf;
    std::int64_t singular = 0;
    std::int64_t below = 0;
  };
  const std::int64_t total = detail::state_space_size(s);
  auto acc = chunked_reduce<FloorAcc>(
      total, FloorAcc{},
      [&](FloorAcc& a, std::int64_t begin, std::int64_t end) {
        std::vector<int> kk;
        detail::unrank_state(s, begin, kk);
        for (std::int64_t idx = begin; idx < end; ++idx) {
          const double eps = detail::state_eps_or_inf(kk, s);
          if (eps != kInf && eps < s.params.client_variance) ++a.below;
          if (eps != kInf &&
              std::abs(eps - s.params.client_variance) < kBoundaryTol) {
            ++a.singular;
          } else {
            const double L = detail::raw_lagrangian(kk, eps, lambda, ctx.inv_req, s);
            if (L < a.floor) a.floor = L;
          }
          detail::advance_state(s, kk);
        }
      },
      [](FloorAcc& a, const FloorAcc& b) {
        a.floor = std::min(a.floor, b.floor);
        a.singular += b.singular;
        a.below += b.below;
      });
  ctx.L_floor = acc.floor;
  ctx.singular_skipped = acc.singular;
  ctx.below_sigma2 = acc.below;
  return ctx;
}

// Smallest achievable generalization error over non-empty participation states.
inline double eps_min(const Scenario& s) {
  detail::check_guard(s, "eps_min");
  const std::int64_t total = detail::state_space_size(s);
  return chunked_reduce<double>(
      total, kInf,
      [&](double& best, std::int64_t begin, std::int64_t end) {
        std::vector<int> k;
        detail::unrank_state(s, begin, k);
        for (std::int64_t idx = begin; idx < end; ++idx) {
          const double eps = detail::state_eps_or_inf(k, s);
          if (eps < best) best = eps;
          detail::advance_state(s, k);
        }
      },
      [](double& a, const double& b) { a = std::min(a, b); });
}

namespace detail {

struct SolveScan {
  Incumbent feasible;
  Incumbent overall;
};

inline bool eps_feasible(double eps_or_inf, double eps_req) {
  if (eps_req == kInf) return true;
  return eps_or_inf <= eps_req + kBoundaryTol;
}

// One pass over the box tracking both the feasible and the unconstrained
// welfare maximizer (deterministic merge regardless of thread schedule).
inline SolveScan scan_welfare(const Scenario& s) {
  check_guard(s, "solve");
  const std::int64_t total = state_space_size(s);
  return chunked_reduce<SolveScan>(
      total, SolveScan{},
      [&](SolveScan& a, std::int64_t begin, std::int64_t end) {
        std::vector<int> k;
        unrank_state(s, begin, k);
        for (std::int64_t idx = begin; idx < end; ++idx) {
          const double eps = state_eps_or_inf(k, s);
          const double w = full_dissemination_welfare(k, eps, s);
          a.overall.accept(w, eps, k);
          if (eps_feasible(eps, s.eps_req)) a.feasible.accept(w, eps, k);
          advance_state(s, k);
        }
      },
      [](SolveScan& a, const SolveScan& b) {
        a.overall.merge(b.overall);
        a.feasible.merge(b.feasible);
      });
}

inline SolveResult result_from(const Incumbent& best, bool binding, double lambda,
                               const Scenario& s) {
  SolveResult r;
  r.k_star = best.k;
  r.b_star.resize(best.k.size());
  std::int64_t ktot = 0;
  for (int v : best.k) ktot += v;
  for (size_t i = 0; i < best.k.size(); ++i)
    r.b_star[i] = ktot == 0 ? 0 : s.types[i].population - best.k[i];
  r.w_star = best.objective;
  r.eps_star = best.eps;
  r.binding = binding;
  r.lambda_star = lambda;
  return r;
}

} // namespace detail

// Constrained welfare maximizer by exhaustive enumeration: among K with
// eps(K) <= eps_req, the maximizer of sum_i [N_i U(eps) - K_i C_i] with
// B_i = N_i - K_i (B = 0 for the all-abstain optimum). Ties break toward
// smaller eps, then lexicographically smaller K.
inline SolveResult solve_bruteforce(const Scenario& s, double lambda = 0.0) {
  const auto scan = detail::scan_welfare(s);
  if (!scan.feasible.valid)
    throw InfeasibleError("no participation state satisfies eps_req");
  const bool binding =
      s.eps_req != kInf && !detail::eps_feasible(scan.overall.eps, s.eps_req);
  return detail::result_from(scan.feasible, binding, lambda, s);
}

namespace detail {

// Candidate states of the all-or-none structure: every corner when I_H is
// empty; otherwise K_i = 0 for i in I_L and, for the single high type, the
// interior stationary points of the one-coordinate Lagrangian restriction.
// Multiple high types are enumerated jointly over their sub-box.
inline std::vector<std::vector<int>> structured_candidates(const Scenario& s,
                                                           double lambda) {
  const int ic = s.type_count();
  const double dg2 = s.params.dg2();
  const double s2 = s.params.client_variance;
  std::vector<int> high;
  for (int i = 0; i < ic; ++i)
    if (s2 > dg2 / static_cast<double>(s.types[i].data_size) + kBoundaryTol)
      high.push_back(i);

  std::vector<std::vector<int>> out;
  if (high.empty()) {
    std::vector<int> k(static_cast<size_t>(ic), 0);
    for (size_t mask = 0; mask < (static_cast<size_t>(1) << ic); ++mask) {
      for (int i = 0; i < ic; ++i)
        k[static_cast<size_t>(i)] = (mask >> i) & 1 ? s.types[static_cast<size_t>(i)].population : 0;
      out.push_back(k);
    }
    return out;
  }

  const double inv_req = requirement_inverse(s.eps_req, s2);
  std::vector<std::vector<int>> per_type(high.size());
  if (high.size() == 1) {
    const int j = high[0];
    const int nj = s.types[static_cast<size_t>(j)].population;
    per_type[0] = {0, nj};
    // Delta L(x) = L(x+1) - L(x) along K_j with every other type at zero.
    std::vector<double> L(static_cast<size_t>(nj) + 1, kInf);
    std::vector<int> k(static_cast<size_t>(ic), 0);
    for (int x = 0; x <= nj; ++x) {
      k[static_cast<size_t>(j)] = x;
      const double eps = state_eps_or_inf(k, s);
      if (eps != kInf && std::abs(eps - s2) < kBoundaryTol) continue;
      L[static_cast<size_t>(x)] = raw_lagrangian(k, eps, lambda, inv_req, s);
    }
    for (int x = 1; x < nj; ++x) {
      const double prev = L[static_cast<size_t>(x - 1)];
      const double cur = L[static_cast<size_t>(x)];
      const double next = L[static_cast<size_t>(x + 1)];
      if (prev == kInf || cur == kInf || next == kInf) continue;
      if (next - cur <= 0.0 && cur - prev >= 0.0)
        per_type[0].push_back(x);
    }
  } else {
    // The paper leaves the multi-high-type interaction open; enumerate their
    // sub-box jointly (low types stay at zero).
    for (size_t h = 0; h < high.size(); ++h) {
      const int nj = s.types[static_cast<size_t>(high[h])].population;
      per_type[h].resize(static_cast<size_t>(nj) + 1);
      for (int x = 0; x <= nj; ++x) per_type[h][static_cast<size_t>(x)] = x;
    }
  }

  std::vector<size_t> pick(high.size(), 0);
  while (true) {
    std::vector<int> k(static_cast<size_t>(ic), 0);
    for (size_t h = 0; h < high.size(); ++h)
      k[static_cast<size_t>(high[h])] = per_type[h][pick[h]];
    out.push_back(std::move(k));
    size_t h = 0;
    for (; h < high.size(); ++h) {
      if (++pick[h] < per_type[h].size()) break;
      pick[h] = 0;
    }
    if (h == high.size()) break;
  }
  return out;
}

} // namespace detail

// Structure-guided constrained solve. The all-or-none candidate set decides
// unconstrained and non-binding instances; a binding error requirement forces
// optima off the candidate set, so those instances fall back to enumeration.
inline SolveResult solve_structured(const Scenario& s, double lambda = 0.0) {
  const auto candidates = detail::structured_candidates(s, lambda);
  detail::SolveScan scan;
  for (const auto& k : candidates) {
    const double eps = detail::state_eps_or_inf(k, s);
    const double w = detail::full_dissemination_welfare(k, eps, s);
    scan.overall.accept(w, eps, k);
    if (detail::eps_feasible(eps, s.eps_req)) scan.feasible.accept(w, eps, k);
  }
  if (s.eps_req == kInf)
    return detail::result_from(scan.overall, false, lambda, s);
  if (scan.overall.valid && detail::eps_feasible(scan.overall.eps, s.eps_req))
    return detail::result_from(scan.overall, false, lambda, s);
  return solve_bruteforce(s, lambda);
}

// argmax of L(.; lambda) over the box, singular states excluded; same
// deterministic tie order as the welfare solvers.
inline std::vector<int> maximize_lagrangian(const Scenario& s, double lambda) {
  detail::check_guard(s, "maximize_lagrangian");
  const double inv_req = detail::requirement_inverse(s.eps_req, s.params.client_variance);
  const std::int64_t total = detail::state_space_size(s);
  auto best = chunked_reduce<detail::Incumbent>(
      total, detail::Incumbent{},
      [&](detail::Incumbent& a, std::int64_t begin, std::int64_t end) {
        std::vector<int> k;
        detail::unrank_state(s, begin, k);
        for (std::int64_t idx = begin; idx < end; ++idx) {
          const double eps = detail::state_eps_or_inf(k, s);
          if (eps == kInf ||
              std::abs(eps - s.params.client_variance) >= kBoundaryTol) {
            const double L = detail::raw_lagrangian(k, eps, lambda, inv_req, s);
            a.accept(L, eps, k);
          }
          detail::advance_state(s, k);
        }
      },
      [](detail::Incumbent& a, const detail::Incumbent& b) { a.merge(b); });
  return best.k;
}

// Multiplier selection with complementary slackness: lambda = 0 when the
// unconstrained maximizer meets eps_req, otherwise the smallest multiplier on
// a doubling-plus-bisection grid whose induced L-maximizer is feasible. The
// inverse-error penalty rewards states on the eps > sigma^2 side only, so when
// the requirement sits at or below sigma^2 (or the doubling caps out) the
// search reports the penalty as ineffective and keeps lambda = 0; constrained
// correctness rests on the enumeration path either way.
inline LagrangianContext find_lambda(const Scenario& s) {
  const double emin = eps_min(s);
  if (s.eps_req + kBoundaryTol < emin)
    throw InfeasibleError("eps_req below the minimum achievable error");
  if (s.eps_req == kInf) return make_lagrangian_context(s, 0.0);

  auto induced_feasible = [&](double lambda) {
    const auto k = maximize_lagrangian(s, lambda);
    return detail::eps_feasible(detail::state_eps_or_inf(k, s), s.eps_req);
  };

  if (induced_feasible(0.0)) return make_lagrangian_context(s, 0.0);

  if (s.eps_req <= s.params.client_variance + kBoundaryTol) {
    auto ctx = make_lagrangian_context(s, 0.0);
    ctx.lambda_ineffective = true;
    return ctx;
  }

  double hi = 1.0;
  bool found = false;
  for (int step = 0; step < 128; ++step) {
    if (induced_feasible(hi)) {
      found = true;
      break;
    }
    hi *= 2.0;
  }
  if (!found) {
    auto ctx = make_lagrangian_context(s, 0.0);
    ctx.lambda_ineffective = true;
    return ctx;
  }
  double lo = hi > 1.0 ? hi / 2.0 : 0.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (induced_feasible(mid)) hi = mid;
    else lo = mid;
  }
  return make_lagrangian_context(s, hi);
}

// Constrained optimum of the participant-only welfare W_FL (the best the
// model-withholding framework can reach at the same error requirement).
inline double fl_optimum(const Scenario& s) {
  detail::check_guard(s, "fl_optimum");
  const std::int64_t total = detail::state_space_size(s);
  auto best = chunked_reduce<detail::Incumbent>(
      total, detail::Incumbent{},
      [&](detail::Incumbent& a, std::int64_t begin, std::int64_t end) {
        std::vector<int> k;
        detail::unrank_state(s, begin, k);
        for (std::int64_t idx = begin; idx < end; ++idx) {
          const double eps = detail::state_eps_or_inf(k, s);
          if (detail::eps_feasible(eps, s.eps_req)) {
            double w = 0.0;
            if (eps != kInf) {
              const double u = s.utility.value(eps);
              for (size_t i = 0; i < k.size(); ++i)
                w += k[i] * (u - s.types[i].cost);
            }
            a.accept(w, eps, k);
          }
          detail::advance_state(s, k);
        }
      },
      [](detail::Incumbent& a, const detail::Incumbent& b) { a.merge(b); });
  if (!best.valid) throw InfeasibleError("no participation state satisfies eps_req");
  return best.objective;
}

struct AlignmentWitness {
  std::vector<int> coalition;
  int type = 0;
  std::string reason;
};

struct AlignmentReport {
  bool holds = true;
  bool partial = false;           // high-heterogeneity scan was sampled
  std::vector<double> psi;        // Psi_i at the full complement / grand coalition
  std::vector<AlignmentWitness> witnesses;
};

// Sufficient conditions under which welfare maximization coincides with error
// minimization. Low heterogeneity checks every proper type subset; high
// heterogeneity checks participant coalitions (sampled beyond the guard).
inline AlignmentReport check_alignment(const Scenario& s) {
  AlignmentReport rep;
  const int ic = s.type_count();
  const double dg2 = s.params.dg2();
  const double s2 = s.params.client_variance;
  const double n_total = static_cast<double>(s.total_population());
  rep.psi.assign(static_cast<size_t>(ic), std::numeric_limits<double>::quiet_NaN());

  bool any_high = false;
  for (int i = 0; i < ic; ++i)
    if (s2 > dg2 / static_cast<double>(s.types[i].data_size) + kBoundaryTol)
      any_high = true;

  auto check_pair = [&](const std::vector<int>& k, int i, double psi, double lhs_den,
                        double cost_factor) {
    // lhs = cost_factor / (U' * deps/dK_i); a non-positive denominator makes
    // the left side non-positive, so the condition holds whenever Psi_i >= 0.
    if (cost_factor == 0.0) return;
    if (lhs_den == 0.0) {
      rep.holds = false;
      rep.witnesses.push_back({k, i, "zero marginal utility"});
      return;
    }
    const double lhs = cost_factor / lhs_den;
    if (lhs > psi + kBoundaryTol) {
      rep.holds = false;
      rep.witnesses.push_back({k, i, "condition violated"});
    }
  };

  if (!any_high) {
    // Every non-empty proper subset of types at full participation.
    for (unsigned mask = 1; mask + 1 < (1u << ic); ++mask) {
      std::vector<int> k(static_cast<size_t>(ic), 0);
      std::int64_t ksum = 0;
      for (int j = 0; j < ic; ++j)
        if ((mask >> j) & 1) {
          k[static_cast<size_t>(j)] = s.types[static_cast<size_t>(j)].population;
          ksum += s.types[static_cast<size_t>(j)].population;
        }
      const double eps_j = detail::state_eps_or_inf(k, s);
      SocialState st{k, std::vector<int>(static_cast<size_t>(ic), 0)};
      for (int i = 0; i < ic; ++i) {
        if ((mask >> i) & 1) continue;
        const double ni = static_cast<double>(s.types[static_cast<size_t>(i)].population);
        const double kd = static_cast<double>(ksum);
        const double psi = dg2 * ni / static_cast<double>(s.types[static_cast<size_t>(i)].data_size) +
                           ni * (ni + 2.0 * kd - 1.0) * s2 - (2.0 * kd * ni + 1.0) * eps_j;
        if (static_cast<unsigned>(mask) == ((1u << ic) - 1u) - (1u << i))
          rep.psi[static_cast<size_t>(i)] = psi;
        if (psi < 0.0) continue;
        const double den = s.utility.deriv(eps_j) * error_partial(st, s, i);
        const double cf = (kd + ni) * (kd + ni) * ni * s.types[static_cast<size_t>(i)].cost / n_total;
        check_pair(k, i, psi, den, cf);
      }
    }
    return rep;
  }

  // High heterogeneity: enumerate (or sample) non-empty coalitions.
  const std::int64_t total = detail::state_space_size(s);
  const std::int64_t scan_guard = 100'000;
  std::mt19937_64 rng(0x5eed5a17ULL);
  const bool sample = total > scan_guard;
  rep.partial = sample;
  const std::int64_t iterations = sample ? scan_guard : total;
  std::vector<int> k;
  for (std::int64_t it = 0; it < iterations; ++it) {
    if (sample) {
      detail::unrank_state(s, static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(total)), k);
    } else {
      detail::unrank_state(s, it, k);
    }
    std::int64_t ksum = 0;
    for (int v : k) ksum += v;
    if (ksum == 0) continue;
    const double eps_k = detail::state_eps_or_inf(k, s);
    SocialState st{k, std::vector<int>(static_cast<size_t>(ic), 0)};
    const double kd = static_cast<double>(ksum);
    for (int i = 0; i < ic; ++i) {
      const double di = static_cast<double>(s.types[static_cast<size_t>(i)].data_size);
      const double psi = dg2 / di + 2.0 * kd * s2 - (2.0 * kd + 1.0) * eps_k;
      if (!sample && ksum == s.total_population())
        rep.psi[static_cast<size_t>(i)] = psi;
      if (psi < 0.0) continue;
      const double arg = dg2 / di + 2.0 * kd * (s2 - eps_k);
      if (!(arg > 0.0)) {
        rep.holds = false;
        rep.witnesses.push_back({k, i, "utility argument not positive"});
        continue;
      }
      const double den = s.utility.deriv(arg) * error_partial(st, s, i);
      const double cf = (kd + 1.0) * (kd + 1.0) * s.types[static_cast<size_t>(i)].cost / n_total;
      check_pair(k, i, psi, den, cf);
    }
  }
  return rep;
}

} // namespace swanmech
