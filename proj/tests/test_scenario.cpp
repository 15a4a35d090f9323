#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <set>

#include "uavrate/scenario.hpp"

using namespace uvr;

TEST_CASE("degenerate annuli pin the radii") {
    ScenarioParams p;
    p.num_users = 2;
    p.near_annulus_m = {0.0, 0.0};
    p.far_annulus_m = {300.0, 300.0};
    const Scenario s = generate_scenario(p);
    CHECK(s.sq_dist[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(s.sq_dist[1] == doctest::Approx(90000.0).epsilon(1e-12));
}

TEST_CASE("generation is deterministic byte-for-byte") {
    ScenarioParams p;
    p.seed = 42;
    const std::string a = scenario_to_json(generate_scenario(p));
    const std::string b = scenario_to_json(generate_scenario(p));
    CHECK(a == b);
}

TEST_CASE("invariants hold across 100 seeds") {
    ScenarioParams p;
    p.num_users = 20;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        p.seed = seed;
        const Scenario s = generate_scenario(p);
        CHECK(validate_scenario(s).empty());
        std::set<int> far_targets;
        for (int k = 0; k < s.num_pairs(); ++k) {
            CHECK(s.sq_dist[s.pairing[k]] >= s.sq_dist[k]);
            far_targets.insert(s.pairing[k]);
        }
        CHECK(static_cast<int>(far_targets.size()) == s.num_pairs());
        for (double d : s.sq_dist) CHECK(d <= 300.0 * 300.0 + 1e-9);
    }
}

TEST_CASE("rejects odd K and broken annuli") {
    ScenarioParams p;
    p.num_users = 3;
    CHECK_THROWS_AS(generate_scenario(p), std::invalid_argument);
    p.num_users = 4;
    p.near_annulus_m = {200.0, 250.0};
    p.far_annulus_m = {100.0, 300.0};  // starts inside the near annulus
    CHECK_THROWS_AS(generate_scenario(p), std::invalid_argument);
    p = ScenarioParams{};
    p.far_annulus_m = {150.0, 400.0};  // outside the cell
    CHECK_THROWS_AS(generate_scenario(p), std::invalid_argument);
}

TEST_CASE("validate_scenario reports targeted violations") {
    Scenario s = generate_scenario(ScenarioParams{});
    CHECK(validate_scenario(s).empty());

    SUBCASE("user outside the cell radius") {
        s.user_xy[6] = {301.0, 0.0};
        s.sq_dist[6] = 301.0 * 301.0;
        int hits = 0;
        for (const auto& v : validate_scenario(s))
            if (v.find("cell_radius") != std::string::npos) ++hits;
        CHECK(hits == 1);
    }
    SUBCASE("duplicate pairing target") {
        s.pairing[1] = s.pairing[0];
        const auto viol = validate_scenario(s);
        REQUIRE(viol.size() == 1);
        CHECK(viol[0].find("bijection") != std::string::npos);
    }
}

TEST_CASE("json round-trip is byte-identical") {
    ScenarioParams p;
    p.seed = 7;
    p.num_users = 8;
    const Scenario s = generate_scenario(p);
    const std::string text1 = scenario_to_json(s);
    const Scenario s2 = scenario_from_json(text1);
    CHECK(validate_scenario(s2).empty());
    CHECK(scenario_to_json(s2) == text1);
}

TEST_CASE("scenario parser rejects unknown keys") {
    const Scenario s = generate_scenario(ScenarioParams{});
    std::string text = scenario_to_json(s);
    text.insert(text.find("\"params\""), "\"bogus\": 1, ");
    CHECK_THROWS_AS(scenario_from_json(text), std::invalid_argument);
}
