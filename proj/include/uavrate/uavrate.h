/* C interface of the UAV max-min rate optimization library.
 *
 * All handles are opaque; every function returning uvr_status reports
 * failure through the code plus an optional caller-supplied error buffer.
 * Strings returned through char** are heap-allocated and must be released
 * with uvr_string_free.
 */
#ifndef UAVRATE_H
#define UAVRATE_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#ifndef UVR_API
#define UVR_API __attribute__((visibility("default")))
#endif

typedef struct uvr_scenario uvr_scenario;
typedef struct uvr_report uvr_report;

/* Nonzero means failure. 2 and 3 double as the CLI exit codes. */
typedef enum uvr_status_code {
    UVR_OK = 0,
    UVR_ERROR = 1,          /* unexpected internal failure */
    UVR_ERR_CONFIG = 2,     /* invalid arguments, config or document schema */
    UVR_ERR_INFEASIBLE = 3, /* scenario violates invariants or coverage */
    UVR_ERR_IO = 4          /* filesystem failure */
} uvr_status;

UVR_API const char* uvr_version(void);

/* params_json holds a scenario params object (same schema as the "scenario"
 * block of a config document; dBm alternates accepted). NULL or "{}" gives
 * the built-in defaults. */
UVR_API uvr_status uvr_scenario_generate(const char* params_json, uvr_scenario** out, char* err,
                                         size_t err_cap);
UVR_API uvr_status uvr_scenario_from_json(const char* text, uvr_scenario** out, char* err,
                                          size_t err_cap);
UVR_API uvr_status uvr_scenario_to_json(const uvr_scenario* s, char** out_text);
/* violations_json receives a JSON array of human-readable strings; empty
 * array means the scenario satisfies every invariant. */
UVR_API uvr_status uvr_scenario_validate(const uvr_scenario* s, char** violations_json);
UVR_API void uvr_scenario_free(uvr_scenario* s);

/* options_json: {"scheme": "noma"|"dpc"|"oma1"|"oma2", "mode": ...,
 * "fixed_sqrt_alt_m": ..., "fixed_sqrt_beamwidth_rad": ..., "sca": {...}};
 * everything except scheme is optional. */
UVR_API uvr_status uvr_solve(const uvr_scenario* s, const char* options_json, uvr_report** out,
                             char* err, size_t err_cap);

UVR_API uvr_status uvr_report_final_mbps(const uvr_report* r, double* out);
UVR_API uvr_status uvr_report_final_nats(const uvr_report* r, double* out);
UVR_API uvr_status uvr_report_iterations(const uvr_report* r, int* out);
UVR_API uvr_status uvr_report_to_json(const uvr_report* r, char** out_text);
UVR_API uvr_status uvr_report_trace_csv(const uvr_report* r, char** out_text);
UVR_API void uvr_report_free(uvr_report* r);

/* Full experiment from a config document. out_dir overrides the config's
 * output_dir when non-NULL; summary_csv (optional) receives the summary
 * table that was also written to disk. */
UVR_API uvr_status uvr_experiment_run(const char* config_json, const char* out_dir,
                                      char** summary_csv, char* err, size_t err_cap);

/* Grid-search verification oracle for two-user scenarios. options_json:
 * {"scheme": ..., "n_power": ..., "n_alt": ..., "n_beamwidth": ...,
 * "n_tau": ..., "refine_passes": ...}. */
UVR_API uvr_status uvr_oracle(const uvr_scenario* s, const char* options_json, char** result_json,
                              char* err, size_t err_cap);

UVR_API void uvr_string_free(char* text);

#ifdef __cplusplus
}
#endif

#endif /* UAVRATE_H */
