#include "uavrate/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "json_detail.hpp"
#include "uavrate/textio.hpp"

namespace uvr {

using nlohmann::json;

const char* to_string(RunMode m) {
    switch (m) {
        case RunMode::Full: return "full";
        case RunMode::FixedAltitudeBeamwidth: return "fixed-altitude-beamwidth";
        case RunMode::EqualAllocation: return "equal-allocation";
    }
    return "?";
}

namespace {

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

void reject_unknown(const json& j, std::initializer_list<const char*> allowed,
                    const std::string& path) {
    if (!j.is_object()) throw std::invalid_argument(path + ": expected a JSON object");
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (item.key() == a) ok = true;
        if (!ok) throw std::invalid_argument(path + ": unknown key \"" + item.key() + "\"");
    }
}

ScenarioParams parse_scenario_params(json jp, const std::string& path) {
    if (!jp.is_object()) throw std::invalid_argument(path + ": expected a JSON object");
    if (jp.contains("power_dbm")) {
        if (jp.contains("total_power_mw"))
            throw std::invalid_argument(path + ": give either power_dbm or total_power_mw");
        jp["total_power_mw"] = dbm_to_mw(jp.at("power_dbm").get<double>());
        jp.erase("power_dbm");
    }
    if (jp.contains("noise_dbm_per_hz")) {
        if (jp.contains("noise_density_mw_per_hz"))
            throw std::invalid_argument(path +
                                        ": give either noise_dbm_per_hz or noise_density_mw_per_hz");
        jp["noise_density_mw_per_hz"] = dbm_to_mw(jp.at("noise_dbm_per_hz").get<double>());
        jp.erase("noise_dbm_per_hz");
    }
    return scenario_params_from_json_obj(jp, path);
}

SolverOptions parse_solver_options(const json& js, const std::string& path) {
    reject_unknown(js,
                   {"barrier_weight", "barrier_decrease", "newton_tol", "max_newton_steps",
                    "gap_target", "tau_floor", "p_floor_rel"},
                   path);
    SolverOptions o;
    if (js.contains("barrier_weight")) o.barrier_weight = js.at("barrier_weight").get<double>();
    if (js.contains("barrier_decrease"))
        o.barrier_decrease = js.at("barrier_decrease").get<double>();
    if (js.contains("newton_tol")) o.newton_tol = js.at("newton_tol").get<double>();
    if (js.contains("max_newton_steps")) o.max_newton_steps = js.at("max_newton_steps").get<int>();
    if (js.contains("gap_target")) o.gap_target = js.at("gap_target").get<double>();
    if (js.contains("tau_floor")) o.tau_floor = js.at("tau_floor").get<double>();
    if (js.contains("p_floor_rel")) o.p_floor_rel = js.at("p_floor_rel").get<double>();
    return o;
}

ScaOptions parse_sca_options(const json& js, const std::string& path) {
    reject_unknown(js, {"max_outer_iters", "rel_tol", "initial_beamwidth_rad", "solver"}, path);
    ScaOptions o;
    if (js.contains("max_outer_iters")) o.max_outer_iters = js.at("max_outer_iters").get<int>();
    if (js.contains("rel_tol")) o.rel_tol = js.at("rel_tol").get<double>();
    if (js.contains("initial_beamwidth_rad"))
        o.initial_beamwidth_rad = js.at("initial_beamwidth_rad").get<double>();
    if (js.contains("solver")) o.solver = parse_solver_options(js.at("solver"), path + ".solver");
    return o;
}

std::string value_token(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    std::string s(buf);
    s.erase(std::remove(s.begin(), s.end(), '+'), s.end());
    return s;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config parse error: ") + e.what());
    }
    reject_unknown(j,
                   {"scenario", "scenario_file", "schemes", "sweep", "mode", "fixed_sqrt_alt_m",
                    "fixed_sqrt_beamwidth_rad", "output_dir", "sca", "workers"},
                   "config");

    ExperimentConfig cfg;
    if (j.contains("scenario") && j.contains("scenario_file"))
        throw std::invalid_argument("config: give either scenario or scenario_file");
    if (j.contains("scenario")) cfg.params = parse_scenario_params(j.at("scenario"), "config.scenario");
    if (j.contains("scenario_file")) cfg.scenario_file = j.at("scenario_file").get<std::string>();

    if (j.contains("schemes")) {
        if (!j.at("schemes").is_array() || j.at("schemes").empty())
            throw std::invalid_argument("config.schemes: expected a non-empty array");
        cfg.schemes.clear();
        for (const auto& s : j.at("schemes"))
            cfg.schemes.push_back(scheme_from_string(s.get<std::string>()));
    }

    if (j.contains("sweep")) {
        reject_unknown(j.at("sweep"), {"parameter", "values"}, "config.sweep");
        SweepSpec sw;
        if (!j.at("sweep").contains("parameter"))
            throw std::invalid_argument("config.sweep: missing required key \"parameter\"");
        if (!j.at("sweep").contains("values"))
            throw std::invalid_argument("config.sweep: missing required key \"values\"");
        sw.parameter = j.at("sweep").at("parameter").get<std::string>();
        if (sw.parameter != "bandwidth" && sw.parameter != "noise_density")
            throw std::invalid_argument(
                "config.sweep.parameter: must be \"bandwidth\" or \"noise_density\"");
        for (const auto& v : j.at("sweep").at("values")) sw.values.push_back(v.get<double>());
        if (sw.values.empty()) throw std::invalid_argument("config.sweep.values: must be non-empty");
        for (std::size_t i = 0; i < sw.values.size(); ++i) {
            if (!(sw.values[i] > 0))
                throw std::invalid_argument("config.sweep.values: must be positive");
            if (i > 0 && sw.values[i] <= sw.values[i - 1])
                throw std::invalid_argument("config.sweep.values: must be strictly ascending");
        }
        cfg.sweep = std::move(sw);
    }

    if (j.contains("mode")) {
        const std::string m = j.at("mode").get<std::string>();
        if (m == "full") cfg.mode = RunMode::Full;
        else if (m == "fixed-altitude-beamwidth") cfg.mode = RunMode::FixedAltitudeBeamwidth;
        else if (m == "equal-allocation") cfg.mode = RunMode::EqualAllocation;
        else throw std::invalid_argument("config.mode: unknown mode \"" + m + "\"");
    }
    if (j.contains("fixed_sqrt_alt_m"))
        cfg.fixed_sqrt_alt_m = j.at("fixed_sqrt_alt_m").get<double>();
    if (j.contains("fixed_sqrt_beamwidth_rad"))
        cfg.fixed_sqrt_beamwidth_rad = j.at("fixed_sqrt_beamwidth_rad").get<double>();
    if (cfg.mode == RunMode::FixedAltitudeBeamwidth) {
        if (!(cfg.fixed_sqrt_alt_m > 0))
            throw std::invalid_argument(
                "config: fixed-altitude-beamwidth mode requires fixed_sqrt_alt_m");
        if (!(cfg.fixed_sqrt_beamwidth_rad > 0))
            throw std::invalid_argument(
                "config: fixed-altitude-beamwidth mode requires fixed_sqrt_beamwidth_rad");
    }

    if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("sca")) cfg.sca = parse_sca_options(j.at("sca"), "config.sca");
    if (j.contains("workers")) {
        cfg.workers = j.at("workers").get<int>();
        if (cfg.workers < 0) throw std::invalid_argument("config.workers: must be >= 0");
    }
    return cfg;
}

Scenario with_sweep_value(const Scenario& s, const std::string& parameter, double value) {
    Scenario out = s;
    if (parameter == "bandwidth") out.params.total_bandwidth_hz = value;
    else if (parameter == "noise_density") out.params.noise_density_mw_per_hz = value;
    else throw std::invalid_argument("unknown sweep parameter: " + parameter);
    out.noise_power_total = out.params.noise_density_mw_per_hz * out.params.total_bandwidth_hz;
    return out;
}

std::string summary_csv(const std::vector<RunRow>& rows) {
    std::ostringstream out;
    out << "scheme,sweep_parameter,sweep_value,final_mbps,iterations,sqrt_alt_m,"
           "sqrt_beamwidth_rad\n";
    for (const auto& r : rows) {
        out << to_string(r.scheme) << ',' << r.sweep_parameter << ',' << fmt_g17(r.sweep_value)
            << ',' << fmt_g17(r.final_mbps) << ',' << r.iterations << ',' << fmt_g17(r.sqrt_alt_m)
            << ',' << fmt_g17(r.sqrt_beamwidth_rad) << '\n';
    }
    return out.str();
}

std::string trace_csv(const SolveReport& report) {
    std::ostringstream out;
    out << "iter,objective_nats,objective_mbps,min_user,wall_ms\n";
    for (const auto& rec : report.trace) {
        out << rec.kappa << ',' << fmt_g17(rec.objective_nats) << ','
            << fmt_g17(rec.objective_mbps) << ',' << (rec.min_user + 1) << ','
            << fmt_g17(rec.wall_ms) << '\n';
    }
    return out.str();
}

namespace {

json design_point_json(const DesignPoint& v) {
    return json{{"tau", v.tau}, {"p_mw", v.p}, {"sq_alt_m2", v.sq_alt}, {"sq_bw_rad2", v.sq_bw}};
}

json run_row_json(const RunRow& r) {
    json trace = json::array();
    for (const auto& rec : r.report.trace) {
        trace.push_back(json{{"iter", rec.kappa},
                             {"objective_nats", rec.objective_nats},
                             {"objective_mbps", rec.objective_mbps},
                             {"surrogate_objective", rec.surrogate_objective},
                             {"min_user", rec.min_user + 1},
                             {"solver_status", to_string(rec.solver_status)},
                             {"newton_steps", rec.newton_steps},
                             {"wall_ms", rec.wall_ms}});
    }
    return json{{"scheme", to_string(r.scheme)},
                {"sweep_parameter", r.sweep_parameter},
                {"sweep_value", r.sweep_value},
                {"final_nats", r.report.final_objective_nats()},
                {"final_mbps", r.final_mbps},
                {"iterations", r.iterations},
                {"termination", r.report.termination},
                {"sqrt_alt_m", r.sqrt_alt_m},
                {"sqrt_beamwidth_rad", r.sqrt_beamwidth_rad},
                {"scenario_digest", r.report.scenario_digest},
                {"v_final", design_point_json(r.report.v_final)},
                {"trace", trace}};
}

}  // namespace

std::string report_json(const ExperimentConfig& cfg, const Scenario& s,
                        const std::vector<RunRow>& rows) {
    json schemes = json::array();
    for (auto sk : cfg.schemes) schemes.push_back(to_string(sk));
    json jcfg{{"schemes", schemes},
              {"mode", to_string(cfg.mode)},
              {"output_dir", cfg.output_dir},
              {"sca", {{"max_outer_iters", cfg.sca.max_outer_iters},
                       {"rel_tol", cfg.sca.rel_tol},
                       {"initial_beamwidth_rad", cfg.sca.initial_beamwidth_rad}}}};
    if (cfg.sweep)
        jcfg["sweep"] = {{"parameter", cfg.sweep->parameter}, {"values", cfg.sweep->values}};
    if (cfg.mode == RunMode::FixedAltitudeBeamwidth) {
        jcfg["fixed_sqrt_alt_m"] = cfg.fixed_sqrt_alt_m;
        jcfg["fixed_sqrt_beamwidth_rad"] = cfg.fixed_sqrt_beamwidth_rad;
    }

    json runs = json::array();
    for (const auto& r : rows) runs.push_back(run_row_json(r));

    json out{{"config", jcfg},
             {"scenario", json::parse(scenario_to_json(s))},
             {"scenario_digest", scenario_digest(s)},
             {"runs", runs}};
    return out.dump(2) + "\n";
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    ExperimentResult result;
    result.scenario =
        cfg.scenario_file.empty() ? generate_scenario(cfg.params) : load_scenario_file(cfg.scenario_file);
    {
        const auto bad = validate_scenario(result.scenario);
        if (!bad.empty())
            throw InfeasibleError("scenario invalid: " + bad.front());
    }

    std::string sweep_param = cfg.sweep ? cfg.sweep->parameter : "bandwidth";
    std::vector<double> values;
    if (cfg.sweep) values = cfg.sweep->values;
    else
        values.push_back(sweep_param == "bandwidth"
                             ? result.scenario.params.total_bandwidth_hz
                             : result.scenario.params.noise_density_mw_per_hz);

    struct Job {
        SchemeKind scheme;
        double value;
    };
    std::vector<Job> jobs;
    for (auto scheme : cfg.schemes)
        for (double v : values) jobs.push_back({scheme, v});

    SolveSpec mode_spec;
    mode_spec.mode = cfg.mode;
    mode_spec.fixed_sqrt_alt_m = cfg.fixed_sqrt_alt_m;
    mode_spec.fixed_sqrt_beamwidth_rad = cfg.fixed_sqrt_beamwidth_rad;
    mode_spec.sca = cfg.sca;
    const ScaOptions sca_opts = effective_sca_options(mode_spec);
    result.rows.resize(jobs.size());

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string first_error;
    std::mutex err_mutex;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size() || failed.load()) break;
            try {
                const Scenario sc = with_sweep_value(result.scenario, sweep_param, jobs[i].value);
                RunRow row;
                row.scheme = jobs[i].scheme;
                row.sweep_parameter = sweep_param;
                row.sweep_value = jobs[i].value;
                row.report = run(sc, jobs[i].scheme, sca_opts);
                row.final_mbps = row.report.final_objective_mbps();
                row.iterations = row.report.iterations();
                row.sqrt_alt_m = std::sqrt(row.report.v_final.sq_alt);
                row.sqrt_beamwidth_rad = std::sqrt(row.report.v_final.sq_bw);
                result.rows[i] = std::move(row);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (first_error.empty()) first_error = e.what();
                failed.store(true);
            }
        }
    };

    int n_workers = cfg.workers > 0 ? cfg.workers
                                    : static_cast<int>(std::thread::hardware_concurrency());
    n_workers = std::max(1, std::min<int>(n_workers, static_cast<int>(jobs.size())));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failed.load()) throw std::runtime_error("run_experiment: " + first_error);

    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(cfg.output_dir, ec);
    if (ec && !fs::is_directory(cfg.output_dir))
        throw std::runtime_error("run_experiment: cannot create output dir " + cfg.output_dir);

    for (const auto& row : result.rows) {
        const std::string path = cfg.output_dir + "/trace_" + to_string(row.scheme) + "_" +
                                 value_token(row.sweep_value) + ".csv";
        write_text_file(path, trace_csv(row.report));
        result.files_written.push_back(path);
    }
    const std::string summary_path = cfg.output_dir + "/summary.csv";
    write_text_file(summary_path, summary_csv(result.rows));
    result.files_written.push_back(summary_path);
    const std::string report_path = cfg.output_dir + "/report.json";
    write_text_file(report_path, report_json(cfg, result.scenario, result.rows));
    result.files_written.push_back(report_path);
    return result;
}

SolveSpec parse_solve_spec(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("solve options parse error: ") + e.what());
    }
    reject_unknown(j, {"scheme", "mode", "fixed_sqrt_alt_m", "fixed_sqrt_beamwidth_rad", "sca"},
                   "options");
    if (!j.contains("scheme"))
        throw std::invalid_argument("options: missing required key \"scheme\"");

    SolveSpec spec;
    spec.scheme = scheme_from_string(j.at("scheme").get<std::string>());
    if (j.contains("mode")) {
        const std::string m = j.at("mode").get<std::string>();
        if (m == "full") spec.mode = RunMode::Full;
        else if (m == "fixed-altitude-beamwidth") spec.mode = RunMode::FixedAltitudeBeamwidth;
        else if (m == "equal-allocation") spec.mode = RunMode::EqualAllocation;
        else throw std::invalid_argument("options.mode: unknown mode \"" + m + "\"");
    }
    if (j.contains("fixed_sqrt_alt_m"))
        spec.fixed_sqrt_alt_m = j.at("fixed_sqrt_alt_m").get<double>();
    if (j.contains("fixed_sqrt_beamwidth_rad"))
        spec.fixed_sqrt_beamwidth_rad = j.at("fixed_sqrt_beamwidth_rad").get<double>();
    if (spec.mode == RunMode::FixedAltitudeBeamwidth &&
        (!(spec.fixed_sqrt_alt_m > 0) || !(spec.fixed_sqrt_beamwidth_rad > 0)))
        throw std::invalid_argument(
            "options: fixed-altitude-beamwidth mode requires fixed_sqrt_alt_m and "
            "fixed_sqrt_beamwidth_rad");
    if (j.contains("sca")) spec.sca = parse_sca_options(j.at("sca"), "options.sca");
    return spec;
}

ScaOptions effective_sca_options(const SolveSpec& spec) {
    ScaOptions o = spec.sca;
    switch (spec.mode) {
        case RunMode::Full: break;
        case RunMode::FixedAltitudeBeamwidth:
            o.locks.altitude_beamwidth = true;
            o.fixed_sqrt_alt = spec.fixed_sqrt_alt_m;
            o.fixed_sqrt_bw = spec.fixed_sqrt_beamwidth_rad;
            break;
        case RunMode::EqualAllocation:
            o.locks.allocation = true;
            break;
    }
    return o;
}

std::string solve_report_to_json(const SolveReport& report) {
    json trace = json::array();
    for (const auto& rec : report.trace) {
        trace.push_back(json{{"iter", rec.kappa},
                             {"objective_nats", rec.objective_nats},
                             {"objective_mbps", rec.objective_mbps},
                             {"surrogate_objective", rec.surrogate_objective},
                             {"min_user", rec.min_user + 1},
                             {"solver_status", to_string(rec.solver_status)},
                             {"newton_steps", rec.newton_steps},
                             {"wall_ms", rec.wall_ms}});
    }
    json out{{"scheme", to_string(report.scheme)},
             {"scenario_digest", report.scenario_digest},
             {"termination", report.termination},
             {"final_nats", report.final_objective_nats()},
             {"final_mbps", report.final_objective_mbps()},
             {"iterations", report.iterations()},
             {"v_final", design_point_json(report.v_final)},
             {"trace", trace}};
    return out.dump(2) + "\n";
}

OracleGrid parse_oracle_grid(const std::string& json_text, SchemeKind& scheme_out) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("oracle options parse error: ") + e.what());
    }
    reject_unknown(j, {"scheme", "n_power", "n_alt", "n_beamwidth", "n_tau", "refine_passes"},
                   "oracle");
    if (!j.contains("scheme"))
        throw std::invalid_argument("oracle: missing required key \"scheme\"");
    scheme_out = scheme_from_string(j.at("scheme").get<std::string>());
    OracleGrid g;
    if (j.contains("n_power")) g.n_power = j.at("n_power").get<int>();
    if (j.contains("n_alt")) g.n_alt = j.at("n_alt").get<int>();
    if (j.contains("n_beamwidth")) g.n_beamwidth = j.at("n_beamwidth").get<int>();
    if (j.contains("n_tau")) g.n_tau = j.at("n_tau").get<int>();
    if (j.contains("refine_passes")) g.refine_passes = j.at("refine_passes").get<int>();
    return g;
}

std::string oracle_result_to_json(const OracleResult& res) {
    json out{{"scheme", to_string(res.scheme)},
             {"best_min_rate_nats", res.best_min_rate},
             {"best_mbps", res.best_mbps},
             {"best_point", design_point_json(res.best)},
             {"grid", {{"n_power", res.grid.n_power},
                       {"n_alt", res.grid.n_alt},
                       {"n_beamwidth", res.grid.n_beamwidth},
                       {"n_tau", res.grid.n_tau},
                       {"refine_passes", res.grid.refine_passes}}},
             {"evaluations", res.evaluations}};
    return out.dump(2) + "\n";
}

namespace {

// Allocation-free two-user min-rate kernels written straight from the rate
// definitions; the oracle must not share the optimizer's code path.
struct TwoUserEval {
    double d0, d1, g, sig_b, P;

    static double wlog(double tau, double num, double den) {
        if (tau <= 0 || num <= 0) return 0.0;
        return tau * std::log1p(num / den);
    }
    // c_k = g / (sigB * theta * (d_k + h)) per mW of transmit power.
    void gains(double h, double theta, double& c0, double& c1) const {
        c0 = g / (sig_b * theta * (d0 + h));
        c1 = g / (sig_b * theta * (d1 + h));
    }
    double noma(double p0, double c0, double c1) const {
        const double p1 = P - p0;
        const double near = wlog(1, p0 * c0, 1.0);
        const double far1 = wlog(1, p1 * c0, 1.0 + p0 * c0);
        const double far2 = wlog(1, p1 * c1, 1.0 + p0 * c1);
        return std::min(near, std::min(far1, far2));
    }
    double dpc(double p0, double c0, double c1) const {
        const double p1 = P - p0;
        return std::min(wlog(1, p0 * c0, 1.0), wlog(1, p1 * c1, 1.0 + p0 * c1));
    }
    double oma2(double p0, double c0, double c1) const {
        const double p1 = P - p0;
        return std::min(wlog(1, p0 * c0, 1.0 + p1 * c0), wlog(1, p1 * c1, 1.0 + p0 * c1));
    }
    double oma1(double tau0, double p0, double c0, double c1) const {
        const double p1 = P - p0, tau1 = 1.0 - tau0;
        return std::min(wlog(tau0, p0 * c0, tau0), wlog(tau1, p1 * c1, tau1));
    }
};

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(n);
    if (n == 1) {
        v[0] = lo;
        return v;
    }
    for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
    return v;
}

}  // namespace

OracleResult brute_force_oracle(const Scenario& s, SchemeKind scheme, const OracleGrid& grid) {
    if (s.params.num_users != 2)
        throw std::invalid_argument("brute_force_oracle: requires a two-user scenario");
    if (grid.n_power < 50 || grid.n_alt < 50 || grid.n_beamwidth < 50 ||
        (scheme == SchemeKind::Oma1 && grid.n_tau < 50))
        throw std::invalid_argument("brute_force_oracle: grid resolutions must be >= 50 per axis");

    TwoUserEval ev{s.sq_dist[0], s.sq_dist[s.pairing[0]], s.params.ref_gain, s.noise_power_total,
                   s.params.total_power_mw};
    const double R = s.params.cell_radius_m;
    const double P = s.params.total_power_mw;
    const bool oma1 = scheme == SchemeKind::Oma1;

    OracleResult res;
    res.grid = grid;
    res.scheme = scheme;
    res.best_min_rate = -1.0;
    double best_p0 = 0, best_sa = s.params.altitude_min_m, best_sb = s.params.beamwidth_max_rad,
           best_tau0 = oma1 ? 0.5 : 1.0;

    double p_lo = 0, p_hi = P;
    double sa_lo = s.params.altitude_min_m, sa_hi = s.params.altitude_max_m;
    double tau_lo = 0, tau_hi = 1;
    double sb_win_lo = s.params.beamwidth_min_rad, sb_win_hi = s.params.beamwidth_max_rad;

    for (int pass = 0; pass <= grid.refine_passes; ++pass) {
        const auto p_axis = linspace(p_lo, p_hi, grid.n_power);
        const auto sa_axis = linspace(sa_lo, sa_hi, grid.n_alt);
        const auto tau_axis = oma1 ? linspace(tau_lo, tau_hi, grid.n_tau) : std::vector<double>{1.0};

        for (double sa : sa_axis) {
            // Each altitude row starts exactly on the coverage boundary.
            const double sb_cov = std::atan(R / sa);
            const double sb_lo = std::max(sb_win_lo, std::max(sb_cov, s.params.beamwidth_min_rad));
            const double sb_hi = std::min(sb_win_hi, s.params.beamwidth_max_rad);
            if (sb_lo > sb_hi) continue;
            const auto sb_axis = linspace(sb_lo, sb_hi, grid.n_beamwidth);
            const double h = sa * sa;
            for (double sb : sb_axis) {
                double c0, c1;
                ev.gains(h, sb * sb, c0, c1);
                for (double tau0 : tau_axis) {
                    for (double p0 : p_axis) {
                        double f;
                        switch (scheme) {
                            case SchemeKind::Noma: f = ev.noma(p0, c0, c1); break;
                            case SchemeKind::Dpc: f = ev.dpc(p0, c0, c1); break;
                            case SchemeKind::Oma2: f = ev.oma2(p0, c0, c1); break;
                            case SchemeKind::Oma1: f = ev.oma1(tau0, p0, c0, c1); break;
                            default: f = 0; break;
                        }
                        ++res.evaluations;
                        if (f > res.best_min_rate) {
                            res.best_min_rate = f;
                            best_p0 = p0;
                            best_sa = sa;
                            best_sb = sb;
                            best_tau0 = tau0;
                        }
                    }
                }
            }
        }

        if (pass < grid.refine_passes) {
            auto narrow = [](double best, double lo, double hi, int n) {
                const double step = (hi - lo) / std::max(1, n - 1);
                return std::pair<double, double>{std::max(lo, best - 1.5 * step),
                                                 std::min(hi, best + 1.5 * step)};
            };
            std::tie(p_lo, p_hi) = narrow(best_p0, p_lo, p_hi, grid.n_power);
            std::tie(sa_lo, sa_hi) = narrow(best_sa, sa_lo, sa_hi, grid.n_alt);
            std::tie(sb_win_lo, sb_win_hi) = narrow(best_sb, sb_win_lo, sb_win_hi, grid.n_beamwidth);
            if (oma1) std::tie(tau_lo, tau_hi) = narrow(best_tau0, tau_lo, tau_hi, grid.n_tau);
        }
    }

    res.best.p = {best_p0, P - best_p0};
    res.best.tau = oma1 ? std::vector<double>{best_tau0, 1.0 - best_tau0}
                        : std::vector<double>{1.0};
    res.best.sq_alt = best_sa * best_sa;
    res.best.sq_bw = best_sb * best_sb;
    res.best_mbps = to_mbps(res.best_min_rate, s.params.total_bandwidth_hz);
    return res;
}

}  // namespace uvr
