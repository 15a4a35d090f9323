#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "uavrate/uavrate.h"

using nlohmann::json;

namespace {

struct ScenarioHandle {
    uvr_scenario* h = nullptr;
    ~ScenarioHandle() { uvr_scenario_free(h); }
};

struct ReportHandle {
    uvr_report* h = nullptr;
    ~ReportHandle() { uvr_report_free(h); }
};

std::string take(char* text) {
    std::string out = text ? text : "";
    uvr_string_free(text);
    return out;
}

}  // namespace

TEST_CASE("version is exposed") { CHECK(std::string(uvr_version()) == "1.0.0"); }

TEST_CASE("scenario lifecycle through the C surface") {
    ScenarioHandle s;
    char err[256] = {0};
    REQUIRE(uvr_scenario_generate(R"({"num_users": 6, "seed": 3})", &s.h, err,
                                  sizeof(err)) == UVR_OK);

    char* text = nullptr;
    REQUIRE(uvr_scenario_to_json(s.h, &text) == UVR_OK);
    const std::string doc = take(text);
    CHECK(json::parse(doc).at("params").at("num_users").get<int>() == 6);

    ScenarioHandle s2;
    REQUIRE(uvr_scenario_from_json(doc.c_str(), &s2.h, err, sizeof(err)) == UVR_OK);
    char* violations = nullptr;
    REQUIRE(uvr_scenario_validate(s2.h, &violations) == UVR_OK);
    CHECK(json::parse(take(violations)).empty());

    ScenarioHandle bad;
    CHECK(uvr_scenario_generate(R"({"num_users": 5})", &bad.h, err, sizeof(err)) ==
          UVR_ERR_CONFIG);
    CHECK(std::string(err).find("even") != std::string::npos);
    CHECK(bad.h == nullptr);

    CHECK(uvr_scenario_generate(R"({"num_userz": 4})", &bad.h, err, sizeof(err)) ==
          UVR_ERR_CONFIG);
}

TEST_CASE("solve and report accessors") {
    ScenarioHandle s;
    char err[256] = {0};
    REQUIRE(uvr_scenario_generate(R"({"num_users": 4, "seed": 8})", &s.h, err, sizeof(err)) ==
            UVR_OK);

    ReportHandle r;
    REQUIRE(uvr_solve(s.h, R"({"scheme": "oma2", "sca": {"rel_tol": 1e-4}})", &r.h, err,
                      sizeof(err)) == UVR_OK);

    double mbps = 0, nats = 0;
    int iters = 0;
    REQUIRE(uvr_report_final_mbps(r.h, &mbps) == UVR_OK);
    REQUIRE(uvr_report_final_nats(r.h, &nats) == UVR_OK);
    REQUIRE(uvr_report_iterations(r.h, &iters) == UVR_OK);
    CHECK(mbps > 0);
    CHECK(nats > 0);
    CHECK(iters >= 1);

    char* text = nullptr;
    REQUIRE(uvr_report_to_json(r.h, &text) == UVR_OK);
    const json rep = json::parse(take(text));
    CHECK(rep.at("scheme").get<std::string>() == "oma2");
    CHECK(rep.at("final_mbps").get<double>() == mbps);
    CHECK(rep.at("trace").size() == static_cast<std::size_t>(iters) + 1);

    REQUIRE(uvr_report_trace_csv(r.h, &text) == UVR_OK);
    CHECK(take(text).rfind("iter,objective_nats,objective_mbps,min_user,wall_ms\n", 0) == 0);

    ReportHandle r2;
    CHECK(uvr_solve(s.h, R"({"scheme": "warp"})", &r2.h, err, sizeof(err)) == UVR_ERR_CONFIG);
}

TEST_CASE("infeasible scenarios map to the infeasible status") {
    ScenarioHandle s;
    char err[256] = {0};
    REQUIRE(uvr_scenario_generate(
                R"({"num_users": 2, "altitude_max_m": 50, "beamwidth_min_rad": 1e-3,
                    "beamwidth_max_rad": 5e-3})",
                &s.h, err, sizeof(err)) == UVR_OK);
    ReportHandle r;
    CHECK(uvr_solve(s.h, R"({"scheme": "noma"})", &r.h, err, sizeof(err)) == UVR_ERR_INFEASIBLE);
}

TEST_CASE("experiment and oracle entry points") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "uvr_capi_test";
    fs::remove_all(dir);

    char err[256] = {0};
    char* summary = nullptr;
    const std::string cfg = R"({
        "scenario": {"num_users": 4, "seed": 5},
        "schemes": ["oma2"],
        "sca": {"rel_tol": 1e-4}
    })";
    REQUIRE(uvr_experiment_run(cfg.c_str(), dir.string().c_str(), &summary, err, sizeof(err)) ==
            UVR_OK);
    CHECK(take(summary).rfind("scheme,", 0) == 0);
    CHECK(fs::exists(dir / "summary.csv"));
    CHECK(fs::exists(dir / "report.json"));
    fs::remove_all(dir);

    ScenarioHandle s;
    REQUIRE(uvr_scenario_generate(R"({"num_users": 2, "seed": 4})", &s.h, err, sizeof(err)) ==
            UVR_OK);
    char* result = nullptr;
    REQUIRE(uvr_oracle(s.h,
                       R"({"scheme": "dpc", "n_power": 50, "n_alt": 50, "n_beamwidth": 50,
                           "refine_passes": 1})",
                       &result, err, sizeof(err)) == UVR_OK);
    const json res = json::parse(take(result));
    CHECK(res.at("best_min_rate_nats").get<double>() > 0);
    CHECK(res.at("evaluations").get<long long>() > 0);

    CHECK(uvr_oracle(s.h, R"({"scheme": "dpc", "n_power": 5})", &result, err, sizeof(err)) ==
          UVR_ERR_CONFIG);
    CHECK(uvr_experiment_run(nullptr, nullptr, nullptr, err, sizeof(err)) == UVR_ERR_CONFIG);
}
