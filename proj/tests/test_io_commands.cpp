#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "support.hpp"
#include "swanmech/commands.hpp"
#include "swanmech/report_io.hpp"
#include "swanmech/scenario_io.hpp"

using namespace swanmech;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << content;
  return path;
}

const char* kBasicConfig = R"({
  "types": [
    {"data_size": 50, "cost": 0.1, "population": 4},
    {"data_size": 120, "cost": 0.24, "population": 3},
    {"data_size": 300, "cost": 0.6, "population": 3}
  ],
  "feature_dim": 10,
  "data_variance": 60.0,
  "client_variance": 0.0,
  "utility": {"kind": "power", "scale": 40, "exponent": 16},
  "eps_req": "inf"
})";

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

TEST_CASE("number formatting uses 12 significant digits") {
  REQUIRE(fmt_cell(1.0 / 3.0) == "0.333333333333");
  REQUIRE(fmt_cell(123456789.123456789) == "123456789.123");
  REQUIRE(fmt_cell(kInf) == "inf");
  REQUIRE(fmt_number(kInf) == "\"inf\"");
  REQUIRE(fmt_number(2.0) == "2");
}

TEST_CASE("config loading") {
  SECTION("valid config") {
    const auto path = write_temp("swanmech_cfg_ok.json", kBasicConfig);
    const LoadedConfig cfg = load_config_file(path.string());
    REQUIRE(cfg.scenario.type_count() == 3);
    REQUIRE(cfg.scenario.eps_req == kInf);
    REQUIRE(cfg.scenario.params.dg2() == Catch::Approx(600.0));
    REQUIRE(cfg.warnings.empty());
  }
  SECTION("unsorted types are re-sorted with a warning") {
    const char* unsorted = R"({
      "types": [
        {"data_size": 120, "cost": 0.24, "population": 3},
        {"data_size": 50, "cost": 0.1, "population": 4},
        {"data_size": 300, "cost": 0.6, "population": 3}
      ],
      "feature_dim": 10, "data_variance": 60.0, "client_variance": 0.0,
      "utility": {"kind": "power", "scale": 40, "exponent": 16},
      "eps_req": "inf"
    })";
    const auto path = write_temp("swanmech_cfg_unsorted.json", unsorted);
    const LoadedConfig loaded = load_config_file(path.string());
    REQUIRE_FALSE(loaded.warnings.empty());
    REQUIRE(loaded.scenario.types[0].data_size == 50);
    REQUIRE(loaded.scenario.types[0].cost == Catch::Approx(0.1));
  }
  SECTION("cost order violation is a config error") {
    std::string cfg = kBasicConfig;
    const auto pos = cfg.find("0.24");
    cfg.replace(pos, 4, "0.05");
    const auto path = write_temp("swanmech_cfg_badcost.json", cfg);
    REQUIRE_THROWS_AS(load_config_file(path.string()), ConfigError);
  }
  SECTION("missing fields are config errors") {
    const auto path = write_temp("swanmech_cfg_missing.json", R"({"types": []})");
    REQUIRE_THROWS_AS(load_config_file(path.string()), ConfigError);
    const auto path2 = write_temp("swanmech_cfg_missing2.json",
                                  R"({"types": [{"data_size": 10, "population": 1}]})");
    REQUIRE_THROWS_AS(load_config_file(path2.string()), ConfigError);
  }
  SECTION("malformed json is a config error") {
    const auto path = write_temp("swanmech_cfg_bad.json", "{nope");
    REQUIRE_THROWS_AS(load_config_file(path.string()), ConfigError);
  }
  SECTION("infeasible eps_req is rejected at load") {
    std::string cfg = kBasicConfig;
    const auto pos = cfg.find("\"inf\"");
    cfg.replace(pos, 5, "0.001");
    const auto path = write_temp("swanmech_cfg_infeasible.json", cfg);
    REQUIRE_THROWS_AS(load_config_file(path.string()), InfeasibleError);
  }
}

TEST_CASE("solve command") {
  const auto path = write_temp("swanmech_cmd_solve.json", kBasicConfig);
  std::ostringstream out, err;
  const int code = run_solve(path.string(), "", out, err);
  REQUIRE(code == kExitOk);
  const std::string json = out.str();
  REQUIRE(json.find("\"k_star\":") != std::string::npos);
  REQUIRE(json.find("\"bruteforce_checked\":true") != std::string::npos);
  REQUIRE(json.find("\"bruteforce_match\":true") != std::string::npos);
  REQUIRE(json.find("\"binding\":false") != std::string::npos);
}

TEST_CASE("solve command exit codes") {
  SECTION("schema error exits 1") {
    const auto path = write_temp("swanmech_cmd_bad.json", "{");
    std::ostringstream out, err;
    REQUIRE(run_solve(path.string(), "", out, err) == kExitConfig);
  }
  SECTION("infeasible requirement exits 2") {
    std::string cfg = kBasicConfig;
    const auto pos = cfg.find("\"inf\"");
    cfg.replace(pos, 5, "0.001");
    const auto path = write_temp("swanmech_cmd_infeasible.json", cfg);
    std::ostringstream out, err;
    REQUIRE(run_solve(path.string(), "", out, err) == kExitInfeasible);
  }
}

TEST_CASE("equilibrium command") {
  const auto path = write_temp("swanmech_cmd_eq.json", kBasicConfig);
  for (const std::string mech : {"swan", "modified_fl", "zero"}) {
    std::ostringstream out, err;
    const int code = run_equilibrium(path.string(), mech, 3, false, "", out, err);
    REQUIRE(code == kExitOk);
    REQUIRE(out.str().find("\"converged\":true") != std::string::npos);
    REQUIRE(out.str().find("\"nash_verified\":true") != std::string::npos);
  }
  SECTION("swan reaches the optimum with zero platform cost") {
    std::ostringstream out, err;
    REQUIRE(run_equilibrium(path.string(), "swan", 3, false, "", out, err) == kExitOk);
    REQUIRE(out.str().find("\"matches_kstar\":true") != std::string::npos);
    REQUIRE(out.str().find("\"platform_cost\":0") != std::string::npos);
  }
  SECTION("trace file is written on request") {
    const auto out_path = std::filesystem::temp_directory_path() / "swanmech_eq.json";
    std::ostringstream out, err;
    REQUIRE(run_equilibrium(path.string(), "swan", 3, true, out_path.string(), out, err) ==
            kExitOk);
    const auto trace_path = out_path.string() + ".trace.csv";
    REQUIRE(std::filesystem::exists(trace_path));
    const std::string trace = read_file(trace_path);
    REQUIRE(trace.rfind("round,client_id,type,old_strategy,new_strategy,potential_value",
                        0) == 0);
    REQUIRE(std::count(trace.begin(), trace.end(), '\n') > 1);
  }
}

TEST_CASE("sweep command is deterministic") {
  std::string cfg = kBasicConfig;
  cfg.pop_back(); // strip closing brace
  const auto brace = cfg.find_last_of('}');
  (void)brace;
  cfg += R"(,
  "sweep": {
    "variable": "unit_cost",
    "grid": [0.001, 0.002, 0.004, 0.008],
    "mechanisms": ["swan", "modified_fl", "zero"],
    "seeds": [1, 2]
  }
})";
  const auto path = write_temp("swanmech_cmd_sweep.json", cfg);
  const auto out1 = std::filesystem::temp_directory_path() / "swanmech_sweep1.csv";
  const auto out2 = std::filesystem::temp_directory_path() / "swanmech_sweep2.csv";
  std::ostringstream sink, err;
  REQUIRE(run_sweep(path.string(), out1.string(), sink, err) == kExitOk);
  REQUIRE(run_sweep(path.string(), out2.string(), sink, err) == kExitOk);
  const std::string csv1 = read_file(out1);
  REQUIRE(csv1 == read_file(out2));
  REQUIRE(csv1.rfind("variable,value,mechanism,welfare_mots,welfare_fl_optimum,"
                     "platform_cost,eps_star,k_star_1,k_star_2,k_star_3,"
                     "nash_verified,status",
                     0) == 0);
  REQUIRE(std::count(csv1.begin(), csv1.end(), '\n') == 13); // header + 12 rows

  SECTION("rows are sorted by value then mechanism") {
    std::istringstream lines(csv1);
    std::string line;
    std::getline(lines, line); // header
    double last_value = -1.0;
    std::string last_mech;
    while (std::getline(lines, line)) {
      std::istringstream cells(line);
      std::string variable, value, mech;
      std::getline(cells, variable, ',');
      std::getline(cells, value, ',');
      std::getline(cells, mech, ',');
      const double v = std::stod(value);
      REQUIRE(v >= last_value);
      if (v == last_value) REQUIRE(mech >= last_mech);
      last_value = v;
      last_mech = mech;
    }
  }
  SECTION("missing sweep section is a config error") {
    const auto bare = write_temp("swanmech_cmd_nosweep.json", kBasicConfig);
    std::ostringstream out;
    REQUIRE(run_sweep(bare.string(), "", out, err) == kExitConfig);
  }
}

TEST_CASE("regions command") {
  const auto path = write_temp("swanmech_cmd_regions.json", kBasicConfig);
  std::ostringstream out, err;
  REQUIRE(run_regions(path.string(), "", out, err) == kExitOk);
  const std::string json = out.str();
  REQUIRE(json.find("\"eta\":") != std::string::npos);
  REQUIRE(json.find("\"region\":") != std::string::npos);
  // iid data: only regions II and IV can appear
  REQUIRE(json.find("\"region\":\"I\"") == std::string::npos);
  REQUIRE(json.find("\"region\":\"III\"") == std::string::npos);
}

TEST_CASE("oracle command") {
  const auto path = write_temp("swanmech_cmd_oracle.json", kBasicConfig);
  std::ostringstream out, err;
  REQUIRE(run_oracle(path.string(), "", out, err) == kExitOk);
  const std::string json = out.str();
  // 5 * 4 * 4 = 80 states
  size_t count = 0;
  for (size_t pos = 0; (pos = json.find("\"k\":[", pos)) != std::string::npos; ++pos)
    ++count;
  REQUIRE(count == 80);
}

TEST_CASE("cli process round trip") {
#ifdef SWANMECH_BIN
  const auto path = write_temp("swanmech_proc.json", kBasicConfig);
  const std::string null_sink = " > /dev/null 2>&1";
  const int ok = std::system((std::string(SWANMECH_BIN) + " solve --config " +
                              path.string() + null_sink)
                                 .c_str());
  REQUIRE(WEXITSTATUS(ok) == 0);

  std::string bad = kBasicConfig;
  const auto pos = bad.find("\"inf\"");
  bad.replace(pos, 5, "0.001");
  const auto bad_path = write_temp("swanmech_proc_bad.json", bad);
  const int infeasible = std::system((std::string(SWANMECH_BIN) + " solve --config " +
                                      bad_path.string() + null_sink)
                                         .c_str());
  REQUIRE(WEXITSTATUS(infeasible) == 2);

  const int schema = std::system((std::string(SWANMECH_BIN) +
                                  " solve --config /nonexistent.json" + null_sink)
                                     .c_str());
  REQUIRE(WEXITSTATUS(schema) == 1);
#else
  SUCCEED("binary path not provided");
#endif
}
