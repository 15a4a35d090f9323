#include "uavrate/uavrate.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include <nlohmann/json.hpp>

#include "json_detail.hpp"
#include "uavrate/experiment.hpp"

using namespace uvr;

struct uvr_scenario {
    Scenario s;
};

struct uvr_report {
    SolveReport r;
};

namespace {

void put_error(char* err, size_t cap, const char* what) {
    if (err && cap > 0) {
        std::strncpy(err, what, cap - 1);
        err[cap - 1] = '\0';
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

template <typename F>
uvr_status guarded(char* err, size_t cap, F&& body) {
    try {
        return body();
    } catch (const InfeasibleError& e) {
        put_error(err, cap, e.what());
        return UVR_ERR_INFEASIBLE;
    } catch (const std::invalid_argument& e) {
        put_error(err, cap, e.what());
        return UVR_ERR_CONFIG;
    } catch (const std::domain_error& e) {
        put_error(err, cap, e.what());
        return UVR_ERR_CONFIG;
    } catch (const std::bad_alloc&) {
        put_error(err, cap, "out of memory");
        return UVR_ERROR;
    } catch (const std::runtime_error& e) {
        put_error(err, cap, e.what());
        return UVR_ERR_IO;
    } catch (const std::exception& e) {
        put_error(err, cap, e.what());
        return UVR_ERROR;
    }
}

ScenarioParams params_from_text(const char* params_json) {
    const std::string text = (params_json && *params_json) ? params_json : "{}";
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("params parse error: ") + e.what());
    }
    // Reuse the config-side parser so dBm alternates behave identically.
    nlohmann::json wrapper{{"scenario", j}};
    return parse_config(wrapper.dump()).params;
}

}  // namespace

extern "C" {

const char* uvr_version(void) { return "1.0.0"; }

uvr_status uvr_scenario_generate(const char* params_json, uvr_scenario** out, char* err,
                                 size_t err_cap) {
    if (!out) return UVR_ERR_CONFIG;
    *out = nullptr;
    return guarded(err, err_cap, [&] {
        auto* h = new uvr_scenario{generate_scenario(params_from_text(params_json))};
        *out = h;
        return UVR_OK;
    });
}

uvr_status uvr_scenario_from_json(const char* text, uvr_scenario** out, char* err,
                                  size_t err_cap) {
    if (!out || !text) return UVR_ERR_CONFIG;
    *out = nullptr;
    return guarded(err, err_cap, [&] {
        auto* h = new uvr_scenario{scenario_from_json(text)};
        *out = h;
        return UVR_OK;
    });
}

uvr_status uvr_scenario_to_json(const uvr_scenario* s, char** out_text) {
    if (!s || !out_text) return UVR_ERR_CONFIG;
    return guarded(nullptr, 0, [&] {
        *out_text = dup_string(scenario_to_json(s->s));
        return *out_text ? UVR_OK : UVR_ERROR;
    });
}

uvr_status uvr_scenario_validate(const uvr_scenario* s, char** violations_json) {
    if (!s || !violations_json) return UVR_ERR_CONFIG;
    return guarded(nullptr, 0, [&] {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& v : validate_scenario(s->s)) arr.push_back(v);
        *violations_json = dup_string(arr.dump(2));
        return *violations_json ? UVR_OK : UVR_ERROR;
    });
}

void uvr_scenario_free(uvr_scenario* s) { delete s; }

uvr_status uvr_solve(const uvr_scenario* s, const char* options_json, uvr_report** out, char* err,
                     size_t err_cap) {
    if (!s || !options_json || !out) return UVR_ERR_CONFIG;
    *out = nullptr;
    return guarded(err, err_cap, [&] {
        const SolveSpec spec = parse_solve_spec(options_json);
        auto* h = new uvr_report{run(s->s, spec.scheme, effective_sca_options(spec))};
        *out = h;
        return UVR_OK;
    });
}

uvr_status uvr_report_final_mbps(const uvr_report* r, double* out) {
    if (!r || !out) return UVR_ERR_CONFIG;
    *out = r->r.final_objective_mbps();
    return UVR_OK;
}

uvr_status uvr_report_final_nats(const uvr_report* r, double* out) {
    if (!r || !out) return UVR_ERR_CONFIG;
    *out = r->r.final_objective_nats();
    return UVR_OK;
}

uvr_status uvr_report_iterations(const uvr_report* r, int* out) {
    if (!r || !out) return UVR_ERR_CONFIG;
    *out = r->r.iterations();
    return UVR_OK;
}

uvr_status uvr_report_to_json(const uvr_report* r, char** out_text) {
    if (!r || !out_text) return UVR_ERR_CONFIG;
    return guarded(nullptr, 0, [&] {
        *out_text = dup_string(solve_report_to_json(r->r));
        return *out_text ? UVR_OK : UVR_ERROR;
    });
}

uvr_status uvr_report_trace_csv(const uvr_report* r, char** out_text) {
    if (!r || !out_text) return UVR_ERR_CONFIG;
    return guarded(nullptr, 0, [&] {
        *out_text = dup_string(trace_csv(r->r));
        return *out_text ? UVR_OK : UVR_ERROR;
    });
}

void uvr_report_free(uvr_report* r) { delete r; }

uvr_status uvr_experiment_run(const char* config_json, const char* out_dir, char** summary_csv_out,
                              char* err, size_t err_cap) {
    if (!config_json) return UVR_ERR_CONFIG;
    if (summary_csv_out) *summary_csv_out = nullptr;
    return guarded(err, err_cap, [&] {
        ExperimentConfig cfg = parse_config(config_json);
        if (out_dir && *out_dir) cfg.output_dir = out_dir;
        const ExperimentResult res = run_experiment(cfg);
        if (summary_csv_out) {
            *summary_csv_out = dup_string(summary_csv(res.rows));
            if (!*summary_csv_out) return UVR_ERROR;
        }
        return UVR_OK;
    });
}

uvr_status uvr_oracle(const uvr_scenario* s, const char* options_json, char** result_json,
                      char* err, size_t err_cap) {
    if (!s || !options_json || !result_json) return UVR_ERR_CONFIG;
    *result_json = nullptr;
    return guarded(err, err_cap, [&] {
        SchemeKind scheme = SchemeKind::Noma;
        const OracleGrid grid = parse_oracle_grid(options_json, scheme);
        const OracleResult res = brute_force_oracle(s->s, scheme, grid);
        *result_json = dup_string(oracle_result_to_json(res));
        return *result_json ? UVR_OK : UVR_ERROR;
    });
}

void uvr_string_free(char* text) { std::free(text); }

}  // extern "C"
