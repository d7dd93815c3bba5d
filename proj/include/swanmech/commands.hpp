#pragma once

#include <atomic>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "swanmech/economy.hpp"
#include "swanmech/error_model.hpp"
#include "swanmech/game.hpp"
#include "swanmech/mechanism.hpp"
#include "swanmech/optimizer.hpp"
#include "swanmech/report_io.hpp"
#include "swanmech/scenario_io.hpp"
#include "swanmech/types.hpp"

namespace swanmech {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitInfeasible = 2;
inline constexpr int kExitNoConvergence = 3;
inline constexpr int kMaxRounds = 500;
inline constexpr std::int64_t kCrossCheckGuard = 10'000;
inline constexpr std::int64_t kOracleDumpGuard = 100'000;

namespace detail {

inline void emit(const std::string& payload, const std::string& out_path,
                 std::ostream& out) {
  if (out_path.empty()) out << payload << "\n";
  else write_file_atomic(out_path, payload + "\n");
}

inline MechanismQuote build_quote(const std::string& mechanism, const Scenario& s,
                                  const SolveResult& solve, const LagrangianContext& ctx,
                                  std::optional<double> modified_fl_reward) {
  if (mechanism == "swan") return swan_quote(s, solve, ctx);
  if (mechanism == "modified_fl") return modified_fl_quote(s, modified_fl_reward.value_or(0.0));
  if (mechanism == "zero") return zero_quote(s);
  throw ConfigError("unknown mechanism: " + mechanism);
}

inline std::string trace_csv(const std::vector<TraceRow>& rows) {
  std::string csv = "round,client_id,type,old_strategy,new_strategy,potential_value\n";
  for (const auto& r : rows) {
    csv += std::to_string(r.round) + "," + std::to_string(r.client) + "," +
           std::to_string(r.type + 1) + "," + strategy_letter(r.from) + "," +
           strategy_letter(r.to) + "," + fmt_cell(r.potential) + "\n";
  }
  return csv;
}

template <typename Fn>
int with_exit_codes(std::ostream& err, Fn fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

} // namespace detail

inline std::int64_t optimizer_statespace(const Scenario& s) {
  return detail::state_space_size(s);
}

// solve: multiplier search plus structured solve, cross-checked against the
// enumeration oracle on small instances.
inline int run_solve(const std::string& config_path, const std::string& out_path,
                     std::ostream& out, std::ostream& err) {
  return detail::with_exit_codes(err, [&] {
    LoadedConfig cfg = load_config_file(config_path);
    for (const auto& w : cfg.warnings) err << "warning: " << w << "\n";
    const Scenario& s = cfg.scenario;
    const LagrangianContext ctx = find_lambda(s);
    const SolveResult res = solve_structured(s, ctx.lambda);

    bool crosschecked = false;
    bool match = true;
    if (optimizer_statespace(s) <= kCrossCheckGuard) {
      crosschecked = true;
      const SolveResult oracle = solve_bruteforce(s, ctx.lambda);
      match = oracle.k_star == res.k_star;
    }

    JsonObject j;
    j.field("k_star", res.k_star)
        .field("b_star", res.b_star)
        .field("w_star", res.w_star)
        .field("eps_star", res.eps_star)
        .field("eps_min", cfg.eps_min_value)
        .field("lambda_star", ctx.lambda)
        .field("binding", res.binding)
        .field("branch", branch_name(scenario_branch(s)))
        .field("bruteforce_checked", crosschecked)
        .field("bruteforce_match", match);
    detail::emit(j.str(), out_path, out);
    return kExitOk;
  });
}

// equilibrium: best-response dynamics from the all-abstain start under the
// chosen mechanism.
inline int run_equilibrium(const std::string& config_path, const std::string& mechanism,
                           std::uint64_t seed, bool want_trace,
                           const std::string& out_path, std::ostream& out,
                           std::ostream& err) {
  return detail::with_exit_codes(err, [&] {
    LoadedConfig cfg = load_config_file(config_path);
    for (const auto& w : cfg.warnings) err << "warning: " << w << "\n";
    const Scenario& s = cfg.scenario;
    const LagrangianContext ctx = find_lambda(s);
    const SolveResult res = solve_structured(s, ctx.lambda);
    const MechanismQuote quote =
        detail::build_quote(mechanism, s, res, ctx, cfg.modified_fl_reward);

    std::vector<TraceRow> trace;
    const EquilibriumResult eq = best_response_dynamics(
        s, quote, StrategyProfile::all_abstain(s), kMaxRounds, seed, &trace);

    JsonObject j;
    j.field("mechanism", mechanism)
        .field("seed", static_cast<std::int64_t>(seed))
        .field("converged", eq.converged)
        .field("rounds", eq.rounds)
        .field("nash_verified", eq.nash_verified)
        .field("k", eq.state.participants)
        .field("b", eq.state.buyers)
        .field("welfare_mots", eq.welfare.w_mots)
        .field("welfare_fl", eq.welfare.w_fl)
        .field("platform_cost", eq.welfare.platform_cost)
        .field("client_payoffs", eq.welfare.client_payoffs)
        .field("matches_kstar",
               eq.state.participants == res.k_star && eq.state.buyers == res.b_star)
        .field("w_star", res.w_star);
    detail::emit(j.str(), out_path, out);

    if (want_trace) {
      const std::string trace_path =
          out_path.empty() ? "trace.csv" : out_path + ".trace.csv";
      write_file_atomic(trace_path, detail::trace_csv(trace));
    }
    if (!eq.converged) {
      if (!want_trace) err << detail::trace_csv(trace);
      err << "dynamics did not converge within " << kMaxRounds << " rounds\n";
      return kExitNoConvergence;
    }
    return kExitOk;
  });
}

namespace detail {

struct SweepRow {
  double value = 0.0;
  std::string mechanism;
  std::string csv;
};

inline Scenario sweep_variant(const Scenario& base, const std::string& variable,
                              double v) {
  Scenario s = base;
  if (variable == "unit_cost") {
    for (auto& t : s.types) t.cost = v * static_cast<double>(t.data_size);
  } else {
    s.eps_req = v;
  }
  s.validate();
  return s;
}

inline std::string sweep_cells(const std::string& variable, double value,
                               const std::string& mechanism, int type_count,
                               const SolveResult* res, double fl_opt,
                               const EquilibriumResult* eq, const std::string& status) {
  std::string row = variable + "," + fmt_cell(value) + "," + mechanism;
  if (res && eq) {
    row += "," + fmt_cell(res->w_star) + "," + fmt_cell(fl_opt) + "," +
           fmt_cell(eq->welfare.platform_cost) + "," + fmt_cell(res->eps_star);
    for (int i = 0; i < type_count; ++i)
      row += "," + std::to_string(res->k_star[static_cast<size_t>(i)]);
    row += std::string(",") + (eq->nash_verified ? "true" : "false");
  } else {
    for (int i = 0; i < 4 + type_count + 1; ++i) row += ",";
  }
  row += "," + status;
  return row;
}

} // namespace detail

// sweep: one CSV row per grid value and mechanism; grid points run in
// parallel, rows are sorted and written atomically.
inline int run_sweep(const std::string& config_path, const std::string& out_path,
                     std::ostream& out, std::ostream& err) {
  return detail::with_exit_codes(err, [&] {
    LoadedConfig cfg = load_config_file(config_path);
    for (const auto& w : cfg.warnings) err << "warning: " << w << "\n";
    if (!cfg.sweep.has_value())
      throw ConfigError("config has no sweep section");
    const SweepSpec& spec = *cfg.sweep;
    const int type_count = cfg.scenario.type_count();

    struct Task {
      double value;
      std::string mechanism;
    };
    std::vector<Task> tasks;
    for (double v : spec.grid)
      for (const auto& m : spec.mechanisms) tasks.push_back({v, m});

    std::vector<detail::SweepRow> rows(tasks.size());
    std::atomic<size_t> next{0};
    auto worker = [&] {
      for (size_t i; (i = next.fetch_add(1)) < tasks.size();) {
        const Task& t = tasks[i];
        detail::SweepRow& row = rows[i];
        row.value = t.value;
        row.mechanism = t.mechanism;
        try {
          const Scenario s = detail::sweep_variant(cfg.scenario, spec.variable, t.value);
          const double emin = eps_min(s);
          if (s.eps_req + kBoundaryTol < emin) {
            row.csv = detail::sweep_cells(spec.variable, t.value, t.mechanism,
                                          type_count, nullptr, 0.0, nullptr, "infeasible");
            continue;
          }
          const LagrangianContext ctx = find_lambda(s);
          const SolveResult res = solve_structured(s, ctx.lambda);
          const double fl_opt = fl_optimum(s);
          const MechanismQuote quote =
              detail::build_quote(t.mechanism, s, res, ctx, cfg.modified_fl_reward);
          std::optional<EquilibriumResult> first;
          bool all_nash = true;
          for (std::uint64_t seed : spec.seeds) {
            EquilibriumResult eq = best_response_dynamics(
                s, quote, StrategyProfile::all_abstain(s), kMaxRounds, seed);
            all_nash = all_nash && eq.converged && eq.nash_verified;
            if (!first.has_value()) first = std::move(eq);
          }
          first->nash_verified = all_nash;
          row.csv = detail::sweep_cells(spec.variable, t.value, t.mechanism, type_count,
                                        &res, fl_opt, &*first, "ok");
        } catch (const InfeasibleError&) {
          row.csv = detail::sweep_cells(spec.variable, t.value, t.mechanism, type_count,
                                        nullptr, 0.0, nullptr, "infeasible");
        } catch (const std::exception& e) {
          std::string msg = e.what();
          for (auto& c : msg)
            if (c == ',' || c == '\n') c = ';';
          row.csv = detail::sweep_cells(spec.variable, t.value, t.mechanism, type_count,
                                        nullptr, 0.0, nullptr, "error:" + msg);
        }
      }
    };
    const int workers =
        std::min<int>(thread_count(), static_cast<int>(tasks.size()));
    if (workers > 1) {
      std::vector<std::thread> pool;
      for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
    } else {
      worker();
    }

    std::stable_sort(rows.begin(), rows.end(),
                     [](const detail::SweepRow& a, const detail::SweepRow& b) {
                       if (a.value != b.value) return a.value < b.value;
                       return a.mechanism < b.mechanism;
                     });

    std::string csv = "variable,value,mechanism,welfare_mots,welfare_fl_optimum,"
                      "platform_cost,eps_star";
    for (int i = 1; i <= type_count; ++i) csv += ",k_star_" + std::to_string(i);
    csv += ",nash_verified,status\n";
    for (const auto& r : rows) csv += r.csv + "\n";

    if (out_path.empty()) out << csv;
    else write_file_atomic(out_path, csv);
    return kExitOk;
  });
}

// regions: network-effect classification per type at the solved optimum (or a
// single largest-type participant when the optimum is the empty market).
inline int run_regions(const std::string& config_path, const std::string& out_path,
                       std::ostream& out, std::ostream& err) {
  return detail::with_exit_codes(err, [&] {
    LoadedConfig cfg = load_config_file(config_path);
    for (const auto& w : cfg.warnings) err << "warning: " << w << "\n";
    const Scenario& s = cfg.scenario;
    const LagrangianContext ctx = find_lambda(s);
    const SolveResult res = solve_structured(s, ctx.lambda);

    SocialState state{res.k_star, res.b_star};
    if (state.total_participants() == 0) {
      err << "warning: optimum is the empty market; using one participant of the "
             "largest type\n";
      state = SocialState::zeros(s);
      state.participants.back() = 1;
    }

    std::vector<std::string> type_reports;
    for (int jt = 0; jt < s.type_count(); ++jt) {
      const RegionReport rr = classify_region(state, s, jt);
      std::vector<double> eps_scan;
      std::vector<double> effect_scan;
      SocialState scan = state;
      for (int k = 0; k <= s.types[static_cast<size_t>(jt)].population; ++k) {
        scan.participants[static_cast<size_t>(jt)] = k;
        scan.buyers[static_cast<size_t>(jt)] = 0;
        const auto e = generalization_error(scan, s);
        eps_scan.push_back(e.has_value() ? *e : kInf);
      }
      for (size_t k = 0; k + 1 < eps_scan.size(); ++k) {
        const bool defined = eps_scan[k] != kInf;
        effect_scan.push_back(defined ? eps_scan[k] - eps_scan[k + 1]
                                      : std::numeric_limits<double>::quiet_NaN());
      }
      JsonObject tj;
      tj.field("type", jt + 1)
          .field("region", region_name(rr.region))
          .field("inv_d", rr.inv_d)
          .field("eps_scan", eps_scan)
          .field("effect_scan", effect_scan);
      type_reports.push_back(tj.str());
    }

    JsonObject j;
    j.field("k", state.participants)
        .field("b", state.buyers)
        .field("eta", eta_threshold(state, s))
        .field("hetero_point", s.params.client_variance / s.params.dg2())
        .raw("types", json_array(type_reports));
    detail::emit(j.str(), out_path, out);
    return kExitOk;
  });
}

// oracle: full enumeration dump for external verification and plotting.
inline int run_oracle(const std::string& config_path, const std::string& out_path,
                      std::ostream& out, std::ostream& err) {
  return detail::with_exit_codes(err, [&] {
    LoadedConfig cfg = load_config_file(config_path);
    for (const auto& w : cfg.warnings) err << "warning: " << w << "\n";
    const Scenario& s = cfg.scenario;
    const std::int64_t total = optimizer_statespace(s);
    if (total > kOracleDumpGuard)
      throw ConfigError("oracle dump limited to " + std::to_string(kOracleDumpGuard) +
                        " states");
    std::vector<std::string> states;
    states.reserve(static_cast<size_t>(total));
    std::vector<int> k(s.types.size(), 0);
    do {
      const double eps = detail::state_eps_or_inf(k, s);
      JsonObject sj;
      sj.field("k", k)
          .field("eps", eps)
          .field("welfare", detail::full_dissemination_welfare(k, eps, s))
          .field("feasible", detail::eps_feasible(eps, s.eps_req));
      states.push_back(sj.str());
    } while (detail::advance_state(s, k));
    JsonObject j;
    j.field("eps_req", s.eps_req).raw("states", json_array(states));
    detail::emit(j.str(), out_path, out);
    return kExitOk;
  });
}

} // namespace swanmech
