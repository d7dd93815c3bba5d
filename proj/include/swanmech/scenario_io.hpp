#pragma once

#include <algorithm>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "swanmech/economy.hpp"
#include "swanmech/optimizer.hpp"
#include "swanmech/types.hpp"

namespace swanmech {

struct SweepSpec {
  std::string variable; // "unit_cost" | "eps_req"
  std::vector<double> grid;
  std::vector<std::string> mechanisms; // subset of {swan, modified_fl, zero}
  std::vector<std::uint64_t> seeds;
};

struct LoadedConfig {
  Scenario scenario;
  std::optional<double> modified_fl_reward;
  std::optional<SweepSpec> sweep;
  std::vector<std::string> warnings;
  double eps_min_value = 0.0;
};

namespace detail {

inline double parse_eps_req(const nlohmann::json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return kInf;
    throw ConfigError("eps_req: only the string \"inf\" is accepted");
  }
  if (!j.is_number()) throw ConfigError("eps_req must be a number or \"inf\"");
  return j.get<double>();
}

inline UtilityFunction parse_utility(const nlohmann::json& j) {
  UtilityFunction u;
  const std::string kind = j.value("kind", "power");
  if (kind == "power") {
    u.kind = UtilityKind::Power;
    u.scale = j.value("scale", 40.0);
    u.exponent = j.value("exponent", 16.0);
    if (!(u.scale > 0.0) || !(u.exponent > 0.0))
      throw ConfigError("power utility needs positive scale and exponent");
  } else if (kind == "table") {
    u.kind = UtilityKind::Table;
    if (!j.contains("points") || !j["points"].is_array() || j["points"].size() < 2)
      throw ConfigError("table utility needs at least two [eps, value] points");
    for (const auto& p : j["points"]) {
      if (!p.is_array() || p.size() != 2) throw ConfigError("table point must be [eps, value]");
      u.table.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
    for (size_t i = 0; i < u.table.size(); ++i) {
      if (!(u.table[i].first > 0.0) || u.table[i].second < 0.0)
        throw ConfigError("table points need eps > 0 and value >= 0");
      if (i > 0 && u.table[i].first <= u.table[i - 1].first)
        throw ConfigError("table eps values must be strictly increasing");
      if (i > 0 && u.table[i].second > u.table[i - 1].second + kBoundaryTol)
        throw ConfigError("table utility must be non-increasing in eps");
    }
  } else {
    throw ConfigError("unknown utility kind: " + kind);
  }
  return u;
}

} // namespace detail

inline LoadedConfig load_config_json(const nlohmann::json& j) {
  LoadedConfig cfg;
  Scenario& s = cfg.scenario;

  if (!j.contains("types") || !j["types"].is_array() || j["types"].empty())
    throw ConfigError("config needs a non-empty types array");
  for (const auto& t : j["types"]) {
    ClientType ct;
    if (!t.contains("data_size") || !t.contains("population"))
      throw ConfigError("each type needs data_size and population");
    ct.data_size = t["data_size"].get<std::int64_t>();
    ct.cost = t.value("cost", 0.0);
    ct.population = t["population"].get<int>();
    s.types.push_back(ct);
  }
  if (!std::is_sorted(s.types.begin(), s.types.end(),
                      [](const ClientType& a, const ClientType& b) {
                        return a.data_size < b.data_size;
                      })) {
    std::stable_sort(s.types.begin(), s.types.end(),
                     [](const ClientType& a, const ClientType& b) {
                       return a.data_size < b.data_size;
                     });
    cfg.warnings.push_back("types were not sorted by data_size; re-sorted");
  }
  for (size_t i = 0; i < s.types.size(); ++i) s.types[i].index = static_cast<int>(i) + 1;

  if (!j.contains("feature_dim") || !j.contains("data_variance"))
    throw ConfigError("config needs feature_dim and data_variance");
  s.params.feature_dim = j["feature_dim"].get<int>();
  s.params.data_variance = j["data_variance"].get<double>();
  s.params.client_variance = j.value("client_variance", 0.0);
  s.utility = j.contains("utility") ? detail::parse_utility(j["utility"]) : UtilityFunction{};
  s.eps_req = j.contains("eps_req") ? detail::parse_eps_req(j["eps_req"]) : kInf;

  try {
    s.validate();
  } catch (const ScenarioError& e) {
    throw ConfigError(e.what());
  }

  if (j.contains("benchmark")) {
    const auto& b = j["benchmark"];
    if (b.contains("modified_fl_reward"))
      cfg.modified_fl_reward = b["modified_fl_reward"].get<double>();
  }

  if (j.contains("sweep")) {
    const auto& sw = j["sweep"];
    SweepSpec spec;
    spec.variable = sw.value("variable", "");
    if (spec.variable != "unit_cost" && spec.variable != "eps_req")
      throw ConfigError("sweep.variable must be unit_cost or eps_req");
    if (!sw.contains("grid") || !sw["grid"].is_array() || sw["grid"].empty())
      throw ConfigError("sweep.grid must be a non-empty array");
    for (const auto& g : sw["grid"]) spec.grid.push_back(g.get<double>());
    if (sw.contains("mechanisms")) {
      for (const auto& m : sw["mechanisms"]) {
        const std::string name = m.get<std::string>();
        if (name != "swan" && name != "modified_fl" && name != "zero")
          throw ConfigError("unknown mechanism in sweep: " + name);
        spec.mechanisms.push_back(name);
      }
    } else {
      spec.mechanisms = {"swan"};
    }
    if (sw.contains("seeds")) {
      for (const auto& v : sw["seeds"]) spec.seeds.push_back(v.get<std::uint64_t>());
    } else {
      spec.seeds = {1};
    }
    cfg.sweep = std::move(spec);
  }

  // Feasibility of the error requirement against the achievable minimum, plus
  // the curvature screen over the reachable range (warning only).
  try {
    cfg.eps_min_value = eps_min(s);
  } catch (const GuardError&) {
    cfg.warnings.push_back("instance too large to validate eps_req at load");
    cfg.eps_min_value = std::numeric_limits<double>::quiet_NaN();
  }
  if (!std::isnan(cfg.eps_min_value)) {
    if (s.eps_req + kBoundaryTol < cfg.eps_min_value)
      throw InfeasibleError("eps_req below minimum achievable error");
    double worst = 0.0;
    for (const auto& t : s.types)
      worst = std::max(worst, s.params.dg2() / static_cast<double>(t.data_size));
    for (const auto& w : validate_curvature(s, cfg.eps_min_value, worst))
      cfg.warnings.push_back(w);
  }
  return cfg;
}

inline LoadedConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  try {
    return load_config_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config schema error: ") + e.what());
  }
}

} // namespace swanmech
