// Command-line front end; talks to the solver exclusively through the
// uavrate C API.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "uavrate/uavrate.h"

using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;

struct ScenarioFlags {
    std::uint64_t seed = 0;
    int users = 0;
    double cell_radius = 0, ref_gain = 0, bandwidth_hz = 0;
    double noise_dbm_per_hz = 0, noise_mw_per_hz = 0;
    double power_dbm = 0, power_mw = 0;
    double alt_min = 0, alt_max = 0, beam_min = 0, beam_max = 0;
    std::vector<double> near_annulus, far_annulus;

    CLI::Option *o_seed = nullptr, *o_users = nullptr, *o_radius = nullptr, *o_gain = nullptr,
                *o_bw = nullptr, *o_noise_dbm = nullptr, *o_noise_mw = nullptr,
                *o_power_dbm = nullptr, *o_power_mw = nullptr, *o_alt_min = nullptr,
                *o_alt_max = nullptr, *o_beam_min = nullptr, *o_beam_max = nullptr,
                *o_near = nullptr, *o_far = nullptr;

    void attach(CLI::App* app) {
        o_seed = app->add_option("--seed", seed, "RNG seed for user placement");
        o_users = app->add_option("--users", users, "number of users K (even)");
        o_radius = app->add_option("--cell-radius", cell_radius, "cell radius R in meters");
        o_gain = app->add_option("--ref-gain", ref_gain, "channel power gain at 1 m");
        o_bw = app->add_option("--bandwidth-hz", bandwidth_hz, "total bandwidth in Hz");
        o_noise_dbm = app->add_option("--noise-dbm-per-hz", noise_dbm_per_hz,
                                      "noise power density in dBm/Hz");
        o_noise_mw = app->add_option("--noise-mw-per-hz", noise_mw_per_hz,
                                     "noise power density in mW/Hz");
        o_power_dbm = app->add_option("--power-dbm", power_dbm, "total power budget in dBm");
        o_power_mw = app->add_option("--power-mw", power_mw, "total power budget in mW");
        o_alt_min = app->add_option("--alt-min", alt_min, "minimum altitude in meters");
        o_alt_max = app->add_option("--alt-max", alt_max, "maximum altitude in meters");
        o_beam_min = app->add_option("--beamwidth-min", beam_min, "minimum beamwidth in rad");
        o_beam_max = app->add_option("--beamwidth-max", beam_max, "maximum beamwidth in rad");
        o_near = app->add_option("--near-annulus", near_annulus,
                                 "near-user annulus [lo hi] in meters")
                     ->expected(2);
        o_far = app->add_option("--far-annulus", far_annulus,
                                "far-user annulus [lo hi] in meters")
                    ->expected(2);
    }

    bool any() const {
        for (const CLI::Option* o :
             {o_seed, o_users, o_radius, o_gain, o_bw, o_noise_dbm, o_noise_mw, o_power_dbm,
              o_power_mw, o_alt_min, o_alt_max, o_beam_min, o_beam_max, o_near, o_far})
            if (o && o->count()) return true;
        return false;
    }

    void apply(json& scenario) const {
        if (o_seed->count()) scenario["seed"] = seed;
        if (o_users->count()) scenario["num_users"] = users;
        if (o_radius->count()) scenario["cell_radius_m"] = cell_radius;
        if (o_gain->count()) scenario["ref_gain"] = ref_gain;
        if (o_bw->count()) scenario["total_bandwidth_hz"] = bandwidth_hz;
        if (o_noise_dbm->count()) scenario["noise_dbm_per_hz"] = noise_dbm_per_hz;
        if (o_noise_mw->count()) scenario["noise_density_mw_per_hz"] = noise_mw_per_hz;
        if (o_power_dbm->count()) scenario["power_dbm"] = power_dbm;
        if (o_power_mw->count()) scenario["total_power_mw"] = power_mw;
        if (o_alt_min->count()) scenario["altitude_min_m"] = alt_min;
        if (o_alt_max->count()) scenario["altitude_max_m"] = alt_max;
        if (o_beam_min->count()) scenario["beamwidth_min_rad"] = beam_min;
        if (o_beam_max->count()) scenario["beamwidth_max_rad"] = beam_max;
        if (o_near->count()) scenario["near_annulus_m"] = near_annulus;
        if (o_far->count()) scenario["far_annulus_m"] = far_annulus;
    }
};

struct RunFlags {
    std::string config_file, scenario_file, out_dir;
    std::vector<std::string> schemes;
    std::string mode;
    double fixed_sqrt_h = 0, fixed_sqrt_theta = 0;
    double rel_tol = 0;
    int max_iters = 0;
    double initial_beamwidth = 0;
    int workers = -1;
    ScenarioFlags scenario;

    CLI::Option *o_mode = nullptr, *o_fh = nullptr, *o_ft = nullptr, *o_rel = nullptr,
                *o_max = nullptr, *o_ibw = nullptr, *o_workers = nullptr, *o_out = nullptr,
                *o_schemes = nullptr;

    void attach(CLI::App* app) {
        app->add_option("--config", config_file, "JSON config file (flags override it)")
            ->check(CLI::ExistingFile);
        app->add_option("--scenario-file", scenario_file, "load scenario instead of generating")
            ->check(CLI::ExistingFile);
        o_schemes = app->add_option("--scheme", schemes, "schemes: noma dpc oma1 oma2");
        o_mode = app->add_option("--mode", mode,
                                 "full | fixed-altitude-beamwidth | equal-allocation");
        o_fh = app->add_option("--fixed-sqrt-h", fixed_sqrt_h, "fixed altitude in meters");
        o_ft = app->add_option("--fixed-sqrt-theta", fixed_sqrt_theta, "fixed beamwidth in rad");
        o_rel = app->add_option("--rel-tol", rel_tol, "outer-loop relative tolerance");
        o_max = app->add_option("--max-iters", max_iters, "outer iteration cap");
        o_ibw = app->add_option("--initial-beamwidth", initial_beamwidth,
                                "starting beamwidth in rad");
        o_workers = app->add_option("--workers", workers, "worker threads (0 = all cores)");
        o_out = app->add_option("--out", out_dir, "output directory");
        scenario.attach(app);
    }

    json build_config() const {
        json cfg = json::object();
        if (!config_file.empty()) {
            std::ifstream in(config_file);
            std::ostringstream ss;
            ss << in.rdbuf();
            cfg = json::parse(ss.str());
        }
        if (!scenario_file.empty()) {
            if (scenario.any() || cfg.contains("scenario"))
                throw CLI::ValidationError(
                    "--scenario-file cannot be combined with scenario parameters");
            cfg["scenario_file"] = scenario_file;
        } else if (scenario.any()) {
            if (!cfg.contains("scenario")) cfg["scenario"] = json::object();
            scenario.apply(cfg["scenario"]);
        }
        if (o_schemes->count()) cfg["schemes"] = schemes;
        if (o_mode->count()) cfg["mode"] = mode;
        if (o_fh->count()) cfg["fixed_sqrt_alt_m"] = fixed_sqrt_h;
        if (o_ft->count()) cfg["fixed_sqrt_beamwidth_rad"] = fixed_sqrt_theta;
        if (o_out->count()) cfg["output_dir"] = out_dir;
        if (o_workers->count()) cfg["workers"] = workers;
        if (o_rel->count() || o_max->count() || o_ibw->count()) {
            if (!cfg.contains("sca")) cfg["sca"] = json::object();
            if (o_rel->count()) cfg["sca"]["rel_tol"] = rel_tol;
            if (o_max->count()) cfg["sca"]["max_outer_iters"] = max_iters;
            if (o_ibw->count()) cfg["sca"]["initial_beamwidth_rad"] = initial_beamwidth;
        }
        return cfg;
    }
};

int run_experiment_config(const json& cfg) {
    char err[512] = {0};
    char* summary = nullptr;
    const uvr_status st =
        uvr_experiment_run(cfg.dump().c_str(), nullptr, &summary, err, sizeof(err));
    if (st != UVR_OK) {
        std::cerr << "error: " << (err[0] ? err : "experiment failed") << "\n";
        return static_cast<int>(st);
    }
    std::cout << summary;
    uvr_string_free(summary);
    return 0;
}

int make_scenario(const std::string& scenario_file, const ScenarioFlags& flags,
                  uvr_scenario** out) {
    char err[512] = {0};
    uvr_status st;
    if (!scenario_file.empty()) {
        std::ifstream in(scenario_file);
        std::ostringstream ss;
        ss << in.rdbuf();
        st = uvr_scenario_from_json(ss.str().c_str(), out, err, sizeof(err));
    } else {
        json params = json::object();
        flags.apply(params);
        st = uvr_scenario_generate(params.dump().c_str(), out, err, sizeof(err));
    }
    if (st != UVR_OK) std::cerr << "error: " << (err[0] ? err : "cannot build scenario") << "\n";
    return static_cast<int>(st);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Max-min user-rate optimization for a UAV base station (NOMA / DPC / OMA)"};
    app.require_subcommand(1);

    // run
    auto* run_cmd = app.add_subcommand("run", "optimize each scheme once and write artifacts");
    RunFlags run_flags;
    run_flags.attach(run_cmd);

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "optimize across a parameter sweep");
    RunFlags sweep_flags;
    sweep_flags.attach(sweep_cmd);
    std::string sweep_param;
    std::vector<double> sweep_values;
    sweep_cmd->add_option("--param", sweep_param, "bandwidth | noise_density");
    sweep_cmd->add_option("--values", sweep_values, "ascending sweep values")->expected(-1);

    // oracle
    auto* oracle_cmd =
        app.add_subcommand("oracle", "exhaustive grid verification (two-user scenarios)");
    std::string oracle_scenario_file, oracle_scheme = "noma";
    int grid_n = 0, refine = -1;
    ScenarioFlags oracle_scn;
    oracle_cmd->add_option("--scenario-file", oracle_scenario_file, "scenario JSON file")
        ->check(CLI::ExistingFile);
    oracle_scn.attach(oracle_cmd);
    oracle_cmd->add_option("--scheme", oracle_scheme, "scheme to verify");
    oracle_cmd->add_option("--grid", grid_n, "grid resolution for every axis (>= 50)");
    oracle_cmd->add_option("--refine-passes", refine, "local refinement passes");

    // validate
    auto* val_cmd = app.add_subcommand("validate", "check scenario invariants");
    std::string val_scenario_file;
    bool val_print = false;
    ScenarioFlags val_scn;
    val_cmd->add_option("--scenario-file", val_scenario_file, "scenario JSON file")
        ->check(CLI::ExistingFile);
    val_scn.attach(val_cmd);
    val_cmd->add_flag("--print", val_print, "print the (generated) scenario JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*run_cmd) return run_experiment_config(run_flags.build_config());

        if (*sweep_cmd) {
            json cfg = sweep_flags.build_config();
            if (!sweep_param.empty() || !sweep_values.empty()) {
                if (sweep_param.empty() || sweep_values.empty()) {
                    std::cerr << "error: sweep requires both --param and --values\n";
                    return kExitConfig;
                }
                cfg["sweep"] = {{"parameter", sweep_param}, {"values", sweep_values}};
            } else if (!cfg.contains("sweep")) {
                std::cerr << "error: sweep requires --param/--values or a config sweep block\n";
                return kExitConfig;
            }
            return run_experiment_config(cfg);
        }

        if (*oracle_cmd) {
            uvr_scenario* scn = nullptr;
            if (int rc = make_scenario(oracle_scenario_file, oracle_scn, &scn)) return rc;
            json opts{{"scheme", oracle_scheme}};
            if (grid_n > 0) {
                opts["n_power"] = grid_n;
                opts["n_alt"] = grid_n;
                opts["n_beamwidth"] = grid_n;
                opts["n_tau"] = grid_n;
            }
            if (refine >= 0) opts["refine_passes"] = refine;
            char err[512] = {0};
            char* result = nullptr;
            const uvr_status st =
                uvr_oracle(scn, opts.dump().c_str(), &result, err, sizeof(err));
            uvr_scenario_free(scn);
            if (st != UVR_OK) {
                std::cerr << "error: " << (err[0] ? err : "oracle failed") << "\n";
                return static_cast<int>(st);
            }
            std::cout << result;
            uvr_string_free(result);
            return 0;
        }

        if (*val_cmd) {
            uvr_scenario* scn = nullptr;
            if (int rc = make_scenario(val_scenario_file, val_scn, &scn)) return rc;
            char* violations = nullptr;
            if (uvr_scenario_validate(scn, &violations) != UVR_OK) {
                uvr_scenario_free(scn);
                return 1;
            }
            const json arr = json::parse(violations);
            uvr_string_free(violations);
            if (val_print) {
                char* text = nullptr;
                if (uvr_scenario_to_json(scn, &text) == UVR_OK) {
                    std::cout << text;
                    uvr_string_free(text);
                }
            }
            uvr_scenario_free(scn);
            if (arr.empty()) {
                std::cerr << "scenario valid\n";
                return 0;
            }
            for (const auto& v : arr) std::cerr << "violation: " << v.get<std::string>() << "\n";
            return kExitInfeasible;
        }
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
