#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "uavrate/experiment.hpp"
#include "uavrate/textio.hpp"

using namespace uvr;
using nlohmann::json;

TEST_CASE("config parsing converts dBm and rejects bad documents") {
    const ExperimentConfig cfg = parse_config(R"({
        "scenario": {"power_dbm": 3, "noise_dbm_per_hz": -174, "num_users": 4},
        "schemes": ["noma", "oma1"],
        "output_dir": "x"
    })");
    CHECK(cfg.params.total_power_mw == doctest::Approx(1.9953).epsilon(1e-4));
    CHECK(cfg.params.noise_density_mw_per_hz == doctest::Approx(3.981e-18).epsilon(1e-3));
    CHECK(cfg.schemes.size() == 2);

    CHECK_THROWS_WITH_AS(parse_config(R"({"bogus": 1})"),
                         doctest::Contains("unknown key \"bogus\""), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config(R"({"scenario": {"power_dbm": 3, "total_power_mw": 2}})"),
                         doctest::Contains("power_dbm"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config(R"({"sweep": {"parameter": "bandwidth"}})"),
                         doctest::Contains("values"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config(R"({"sweep": {"parameter": "bandwidth",
                                               "values": [2e7, 1e7]}})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_config(R"({"mode": "fixed-altitude-beamwidth"})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_config("not json"), std::invalid_argument);
}

TEST_CASE("oracle: degenerate geometry and vanishing power") {
    ScenarioParams p;
    p.num_users = 2;
    p.near_annulus_m = {100.0, 100.0};
    p.far_annulus_m = {100.0, 100.0};
    const Scenario s = generate_scenario(p);

    OracleGrid grid;
    grid.n_power = 60;
    grid.n_alt = 50;
    grid.n_beamwidth = 50;
    grid.refine_passes = 1;

    const OracleResult res = brute_force_oracle(s, SchemeKind::Noma, grid);
    CHECK(res.best.p[0] > 0.0);
    CHECK(res.best.p[0] < s.params.total_power_mw);
    CHECK(is_feasible(s, SchemeKind::Noma, res.best).ok);

    // Identical geometry makes the OMA-2 objective symmetric in the powers.
    DesignPoint v = res.best;
    v.tau = {1.0};
    const double a = objective(s, SchemeKind::Oma2, v).min_rate;
    std::swap(v.p[0], v.p[1]);
    CHECK(objective(s, SchemeKind::Oma2, v).min_rate == doctest::Approx(a).epsilon(1e-12));

    Scenario tiny = s;
    tiny.params.total_power_mw = 1e-9;
    CHECK(brute_force_oracle(tiny, SchemeKind::Noma, grid).best_min_rate < 1e-6);
    CHECK(brute_force_oracle(tiny, SchemeKind::Noma, grid).best_min_rate > 0.0);
}

TEST_CASE("oracle rejects wrong scenarios and coarse grids") {
    ScenarioParams p;
    p.num_users = 4;
    CHECK_THROWS_AS(brute_force_oracle(generate_scenario(p), SchemeKind::Noma),
                    std::invalid_argument);
    p.num_users = 2;
    OracleGrid grid;
    grid.n_power = 10;
    CHECK_THROWS_AS(brute_force_oracle(generate_scenario(p), SchemeKind::Noma, grid),
                    std::invalid_argument);
}

TEST_CASE("optimizer agrees with the oracle on a two-user instance") {
    ScenarioParams p;
    p.num_users = 2;
    p.seed = 21;
    const Scenario s = generate_scenario(p);
    ScaOptions opts;
    opts.rel_tol = 1e-6;
    const double got = run(s, SchemeKind::Dpc, opts).final_objective_nats();
    const double want = brute_force_oracle(s, SchemeKind::Dpc).best_min_rate;
    CHECK(std::abs(got - want) <= 0.02 * want);
}

TEST_CASE("run_experiment writes consistent artifacts") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "uvr_experiment_test";
    fs::remove_all(dir);

    ExperimentConfig cfg = parse_config(R"({
        "scenario": {"num_users": 4, "seed": 2},
        "schemes": ["noma", "oma2"],
        "sweep": {"parameter": "bandwidth", "values": [1.0e7, 1.5e7]},
        "sca": {"rel_tol": 1e-4}
    })");
    cfg.output_dir = dir.string();
    const ExperimentResult res = run_experiment(cfg);

    REQUIRE(res.rows.size() == 4);
    CHECK(fs::exists(dir / "summary.csv"));
    CHECK(fs::exists(dir / "report.json"));
    CHECK(fs::exists(dir / "trace_noma_1e07.csv"));
    CHECK(fs::exists(dir / "trace_oma2_1.5e07.csv"));

    // Mbps must not decrease in bandwidth, per scheme.
    CHECK(res.rows[1].final_mbps >= res.rows[0].final_mbps);
    CHECK(res.rows[3].final_mbps >= res.rows[2].final_mbps);

    // Summary rows must reconstruct the report headline numbers exactly.
    std::ifstream sum(dir / "summary.csv");
    std::string line;
    std::getline(sum, line);
    CHECK(line ==
          "scheme,sweep_parameter,sweep_value,final_mbps,iterations,sqrt_alt_m,"
          "sqrt_beamwidth_rad");
    json report = json::parse(read_text_file((dir / "report.json").string()));
    REQUIRE(report.at("runs").size() == 4);
    for (const auto& run_obj : report.at("runs")) {
        REQUIRE(std::getline(sum, line));
        std::stringstream ss(line);
        std::string scheme, param, cell;
        std::getline(ss, scheme, ',');
        std::getline(ss, param, ',');
        std::getline(ss, cell, ',');
        const double sweep_value = std::strtod(cell.c_str(), nullptr);
        std::getline(ss, cell, ',');
        const double final_mbps = std::strtod(cell.c_str(), nullptr);
        std::getline(ss, cell, ',');
        const int iters = std::atoi(cell.c_str());
        CHECK(scheme == run_obj.at("scheme").get<std::string>());
        CHECK(param == run_obj.at("sweep_parameter").get<std::string>());
        CHECK(sweep_value == run_obj.at("sweep_value").get<double>());
        CHECK(final_mbps == run_obj.at("final_mbps").get<double>());
        CHECK(iters == run_obj.at("iterations").get<int>());
    }

    // Trace files carry the spec'd columns and the full iteration count.
    std::ifstream tr(dir / "trace_noma_1e07.csv");
    std::getline(tr, line);
    CHECK(line == "iter,objective_nats,objective_mbps,min_user,wall_ms");
    int rows = 0;
    while (std::getline(tr, line)) ++rows;
    CHECK(rows == res.rows[0].iterations + 1);

    fs::remove_all(dir);
}

TEST_CASE("experiment scenarios keep the same placement across sweep values") {
    ScenarioParams p;
    p.num_users = 4;
    const Scenario base = generate_scenario(p);
    const Scenario swept = with_sweep_value(base, "noise_density", 1e-17);
    CHECK(swept.user_xy == base.user_xy);
    CHECK(swept.params.noise_density_mw_per_hz == 1e-17);
    CHECK(swept.noise_power_total ==
          doctest::Approx(1e-17 * base.params.total_bandwidth_hz).epsilon(1e-15));
    CHECK_THROWS_AS(with_sweep_value(base, "altitude", 100.0), std::invalid_argument);
}

TEST_CASE("solve spec parsing mirrors the config schema") {
    const SolveSpec spec = parse_solve_spec(R"({
        "scheme": "dpc",
        "mode": "fixed-altitude-beamwidth",
        "fixed_sqrt_alt_m": 200.0,
        "fixed_sqrt_beamwidth_rad": 1.0,
        "sca": {"rel_tol": 1e-3}
    })");
    CHECK(spec.scheme == SchemeKind::Dpc);
    CHECK(spec.mode == RunMode::FixedAltitudeBeamwidth);
    const ScaOptions opts = effective_sca_options(spec);
    CHECK(opts.locks.altitude_beamwidth);
    CHECK(opts.fixed_sqrt_alt == 200.0);
    CHECK_THROWS_AS(parse_solve_spec(R"({"mode": "full"})"), std::invalid_argument);
}
