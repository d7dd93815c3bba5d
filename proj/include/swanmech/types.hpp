#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace swanmech {

// Absolute tolerance for comparisons against analytic thresholds.
inline constexpr double kBoundaryTol = 1e-12;
// Absolute tolerance for payoff comparisons in the client game.
inline constexpr double kPayoffTol = 1e-9;
// Enumeration guard: product of (N_i + 1) over types must stay below this.
inline constexpr std::int64_t kEnumerationGuard = 10'000'000;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GuardError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// |eps - sigma^2| fell below kBoundaryTol inside a Lagrangian evaluation.
struct SingularError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat potential: L(K*) == L0 while the optimal welfare is positive.
struct DegenerateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One client heterogeneity class.
struct ClientType {
  int index = 0;             // ordinal, 1-based within the scenario
  std::int64_t data_size = 1;
  double cost = 0.0;
  int population = 1;
};

struct HeterogeneityParams {
  int feature_dim = 1;        // d
  double data_variance = 1.0; // gamma^2
  double client_variance = 0; // sigma^2

  double dg2() const { return static_cast<double>(feature_dim) * data_variance; }
};

enum class UtilityKind { Power, Table };

// Non-increasing model utility U(eps). The power kind is U = scale * eps^-exponent,
// evaluated in log domain; the table kind interpolates monotone user points
// linearly and clamps outside the covered range.
struct UtilityFunction {
  UtilityKind kind = UtilityKind::Power;
  double scale = 40.0;
  double exponent = 16.0;
  std::vector<std::pair<double, double>> table; // (eps, value), eps ascending

  double value(double eps) const {
    if (!(eps > 0.0)) throw ScenarioError("utility: eps must be positive");
    if (kind == UtilityKind::Power) {
      return std::exp(std::log(scale) - exponent * std::log(eps));
    }
    if (table.empty()) throw ScenarioError("utility: empty table");
    if (eps <= table.front().first) return table.front().second;
    if (eps >= table.back().first) return table.back().second;
    auto hi = std::upper_bound(table.begin(), table.end(), eps,
                               [](double e, const auto& p) { return e < p.first; });
    auto lo = hi - 1;
    double t = (eps - lo->first) / (hi->first - lo->first);
    return lo->second + t * (hi->second - lo->second);
  }

  double deriv(double eps) const {
    if (!(eps > 0.0)) throw ScenarioError("utility: eps must be positive");
    if (kind == UtilityKind::Power) return -(exponent / eps) * value(eps);
    if (table.empty()) throw ScenarioError("utility: empty table");
    if (eps <= table.front().first || eps >= table.back().first) return 0.0;
    auto hi = std::upper_bound(table.begin(), table.end(), eps,
                               [](double e, const auto& p) { return e < p.first; });
    auto lo = hi - 1;
    return (hi->second - lo->second) / (hi->first - lo->first);
  }

  double second_deriv(double eps) const {
    if (kind == UtilityKind::Power)
      return exponent * (exponent + 1.0) / (eps * eps) * value(eps);
    return 0.0; // piecewise linear
  }
};

struct Scenario {
  std::vector<ClientType> types;
  HeterogeneityParams params;
  UtilityFunction utility;
  double eps_req = kInf;

  int type_count() const { return static_cast<int>(types.size()); }

  std::int64_t total_population() const {
    std::int64_t n = 0;
    for (const auto& t : types) n += t.population;
    return n;
  }

  // Type index of the flat client id n (clients grouped by type, type 0 first).
  int client_type(std::int64_t n) const {
    std::int64_t acc = 0;
    for (int i = 0; i < type_count(); ++i) {
      acc += types[i].population;
      if (n < acc) return i;
    }
    throw ScenarioError("client id out of range");
  }

  void validate() const {
    if (types.empty()) throw ScenarioError("scenario has no client types");
    for (int i = 0; i < type_count(); ++i) {
      const auto& t = types[i];
      if (t.data_size < 1) throw ScenarioError("data_size must be >= 1");
      if (t.population < 1) throw ScenarioError("population must be >= 1");
      if (t.cost < 0.0) throw ScenarioError("cost must be >= 0");
      if (i > 0 && types[i - 1].data_size > t.data_size)
        throw ScenarioError("types must be sorted by non-decreasing data_size");
      if (i > 0 && types[i - 1].cost > t.cost + kBoundaryTol)
        throw ScenarioError("types must be sorted by non-decreasing cost");
    }
    if (params.feature_dim < 1) throw ScenarioError("feature_dim must be >= 1");
    if (!(params.data_variance > 0.0)) throw ScenarioError("data_variance must be > 0");
    if (params.client_variance < 0.0) throw ScenarioError("client_variance must be >= 0");
    if (std::isnan(eps_req)) throw ScenarioError("eps_req must be a number or +inf");
  }
};

// Per-type participation / purchase counts.
struct SocialState {
  std::vector<int> participants; // K_i
  std::vector<int> buyers;       // B_i

  static SocialState zeros(const Scenario& s) {
    return SocialState{std::vector<int>(s.types.size(), 0),
                       std::vector<int>(s.types.size(), 0)};
  }

  std::int64_t total_participants() const {
    std::int64_t k = 0;
    for (int v : participants) k += v;
    return k;
  }

  std::int64_t total_buyers() const {
    std::int64_t b = 0;
    for (int v : buyers) b += v;
    return b;
  }

  void validate(const Scenario& s) const {
    if (participants.size() != s.types.size() || buyers.size() != s.types.size())
      throw ScenarioError("social state size mismatch");
    for (int i = 0; i < s.type_count(); ++i) {
      if (participants[i] < 0 || buyers[i] < 0)
        throw ScenarioError("negative count in social state");
      if (participants[i] + buyers[i] > s.types[i].population)
        throw ScenarioError("state exceeds type population");
    }
    if (total_participants() == 0 && total_buyers() > 0)
      throw ScenarioError("buyers present with no trained model (K = 0)");
  }
};

enum class Region { I, II, III, IV };

inline const char* region_name(Region r) {
  switch (r) {
    case Region::I: return "I";
    case Region::II: return "II";
    case Region::III: return "III";
    case Region::IV: return "IV";
  }
  return "?";
}

struct RegionReport {
  int type_index = 0; // 0-based
  Region region = Region::II;
  double eta = 0.0;
  double inv_d = 0.0;        // 1 / D_j
  double hetero_point = 0.0; // sigma^2 / (d * gamma^2)
};

enum class Strategy : char { Abstain = 'A', Join = 'J', Buy = 'B' };

inline char strategy_letter(Strategy s) { return static_cast<char>(s); }

// Flat strategy assignment, clients grouped by type.
struct StrategyProfile {
  std::vector<Strategy> strategies;

  static StrategyProfile all_abstain(const Scenario& s) {
    return StrategyProfile{
        std::vector<Strategy>(static_cast<size_t>(s.total_population()), Strategy::Abstain)};
  }

  SocialState induced_state(const Scenario& s) const {
    SocialState st = SocialState::zeros(s);
    if (static_cast<std::int64_t>(strategies.size()) != s.total_population())
      throw ScenarioError("profile size mismatch");
    std::int64_t n = 0;
    for (int i = 0; i < s.type_count(); ++i) {
      for (int c = 0; c < s.types[i].population; ++c, ++n) {
        if (strategies[static_cast<size_t>(n)] == Strategy::Join) ++st.participants[i];
        else if (strategies[static_cast<size_t>(n)] == Strategy::Buy) ++st.buyers[i];
      }
    }
    return st;
  }
};

} // namespace swanmech
