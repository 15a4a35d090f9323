#pragma once

#include <optional>
#include <string>
#include <vector>

#include "uavrate/sca.hpp"

namespace uvr {

enum class RunMode { Full, FixedAltitudeBeamwidth, EqualAllocation };

const char* to_string(RunMode m);

struct SweepSpec {
    std::string parameter;       // "bandwidth" | "noise_density"
    std::vector<double> values;  // positive, ascending
};

struct ExperimentConfig {
    ScenarioParams params;
    std::string scenario_file;  // when set, overrides generated placement
    std::vector<SchemeKind> schemes = {SchemeKind::Noma, SchemeKind::Dpc, SchemeKind::Oma1,
                                       SchemeKind::Oma2};
    std::optional<SweepSpec> sweep;
    RunMode mode = RunMode::Full;
    double fixed_sqrt_alt_m = 0.0;
    double fixed_sqrt_beamwidth_rad = 0.0;
    std::string output_dir = "out";
    ScaOptions sca;
    int workers = 0;  // 0: one per hardware thread, capped by job count
};

// Strict JSON: unknown keys rejected with their path; dBm fields converted to
// mW at parse time.
ExperimentConfig parse_config(const std::string& json_text);

struct RunRow {
    SchemeKind scheme = SchemeKind::Noma;
    std::string sweep_parameter;
    double sweep_value = 0.0;
    SolveReport report;
    double final_mbps = 0.0;
    int iterations = 0;
    double sqrt_alt_m = 0.0;
    double sqrt_beamwidth_rad = 0.0;
};

struct ExperimentResult {
    Scenario scenario;
    std::vector<RunRow> rows;
    std::vector<std::string> files_written;
};

// Runs every (scheme, sweep value) pair on a bounded worker pool and emits
// trace_<scheme>_<value>.csv per run plus summary.csv and report.json.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Copy of `s` with one swept parameter replaced and sigma_B rebuilt.
Scenario with_sweep_value(const Scenario& s, const std::string& parameter, double value);

struct OracleGrid {
    int n_power = 100;
    int n_alt = 64;
    int n_beamwidth = 64;
    int n_tau = 64;        // OMA-1 only
    int refine_passes = 2;  // local re-grids around the incumbent
};

struct OracleResult {
    DesignPoint best;
    double best_min_rate = 0.0;  // nats/s/Hz
    double best_mbps = 0.0;
    OracleGrid grid;
    SchemeKind scheme = SchemeKind::Noma;
    long long evaluations = 0;
};

// Exhaustive scan for two-user scenarios: p1 over [0, P], altitude and
// beamwidth over their boxes restricted to the coverage region (each altitude
// row starts exactly on the coverage boundary), plus a tau axis for OMA-1.
OracleResult brute_force_oracle(const Scenario& s, SchemeKind scheme, const OracleGrid& grid = {});

std::string summary_csv(const std::vector<RunRow>& rows);
std::string trace_csv(const SolveReport& report);
std::string report_json(const ExperimentConfig& cfg, const Scenario& s,
                        const std::vector<RunRow>& rows);

// Single-solve request, the unit the C API works in.
struct SolveSpec {
    SchemeKind scheme = SchemeKind::Noma;
    RunMode mode = RunMode::Full;
    double fixed_sqrt_alt_m = 0.0;
    double fixed_sqrt_beamwidth_rad = 0.0;
    ScaOptions sca;
};

SolveSpec parse_solve_spec(const std::string& json_text);
ScaOptions effective_sca_options(const SolveSpec& spec);
std::string solve_report_to_json(const SolveReport& report);

OracleGrid parse_oracle_grid(const std::string& json_text, SchemeKind& scheme_out);
std::string oracle_result_to_json(const OracleResult& res);

}  // namespace uvr
