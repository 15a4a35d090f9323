#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "uavrate/sca.hpp"

using namespace uvr;

namespace {

void check_trace(const Scenario& s, SchemeKind scheme, const SolveReport& rep) {
    REQUIRE(!rep.trace.empty());
    for (std::size_t i = 1; i < rep.trace.size(); ++i)
        CHECK(rep.trace[i].objective_nats >= rep.trace[i - 1].objective_nats - 1e-12);
    CHECK(is_feasible(s, scheme, rep.v_final).ok);
}

}  // namespace

TEST_CASE("initialization follows the three-step recipe") {
    ScenarioParams params;
    params.total_power_mw = 2.0;
    const Scenario s = generate_scenario(params);

    const DesignPoint v = initialize(s, SchemeKind::Noma);
    CHECK(v.sq_alt == doctest::Approx(9.0e4).epsilon(1e-12));  // clamp((300/tan(pi/4))^2, ...)
    CHECK(v.sq_bw == doctest::Approx(std::pow(M_PI / 4, 2)).epsilon(1e-12));
    for (double p : v.p) CHECK(p == doctest::Approx(0.1).epsilon(1e-12));
    for (double t : v.tau) CHECK(t == doctest::Approx(0.1).epsilon(1e-12));

    const DesignPoint w = initialize(s, SchemeKind::Oma1);
    CHECK(w.tau.size() == 20);
    for (double t : w.tau) CHECK(t == doctest::Approx(0.05).epsilon(1e-12));

    CHECK(is_feasible(s, SchemeKind::Noma, v).ok);
}

TEST_CASE("initialization widens the beam when the altitude box cannot cover") {
    ScenarioParams params;
    params.altitude_max_m = 150.0;  // (300 / tan(pi/4))^2 would exceed the box
    const Scenario s = generate_scenario(params);
    const DesignPoint v = initialize(s, SchemeKind::Noma);
    CHECK(std::sqrt(v.sq_alt) * std::tan(std::sqrt(v.sq_bw)) >= 300.0 * (1 - 1e-12));
    CHECK(v.sq_bw > std::pow(M_PI / 4, 2));
}

TEST_CASE("initialization reports an uncoverable cell") {
    ScenarioParams params;
    params.altitude_max_m = 50.0;
    params.beamwidth_min_rad = 1e-3;
    params.beamwidth_max_rad = 5e-3;  // reach ~ 0.25 m
    const Scenario s = generate_scenario(params);
    CHECK_THROWS_AS(initialize(s, SchemeKind::Noma), InfeasibleError);
}

TEST_CASE("run produces a monotone, feasible, convergent trace") {
    ScenarioParams params;
    params.num_users = 6;
    params.seed = 4;
    const Scenario s = generate_scenario(params);

    ScaOptions opts;
    opts.rel_tol = 1e-5;
    for (auto scheme : {SchemeKind::Noma, SchemeKind::Dpc, SchemeKind::Oma1, SchemeKind::Oma2}) {
        const SolveReport rep = run(s, scheme, opts);
        check_trace(s, scheme, rep);
        CHECK(rep.termination == "converged");
        CHECK(rep.final_objective_nats() > rep.trace.front().objective_nats);
    }
}

TEST_CASE("identical inputs give identical traces") {
    ScenarioParams params;
    params.num_users = 4;
    params.seed = 9;
    const Scenario s = generate_scenario(params);
    const SolveReport a = run(s, SchemeKind::Noma);
    const SolveReport b = run(s, SchemeKind::Noma);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
        CHECK(a.trace[i].objective_nats == b.trace[i].objective_nats);
        CHECK(a.trace[i].surrogate_objective == b.trace[i].surrogate_objective);
    }
    CHECK(a.v_final.p == b.v_final.p);
    CHECK(a.v_final.sq_alt == b.v_final.sq_alt);
}

TEST_CASE("equal-allocation lock freezes tau and p for the whole run") {
    ScenarioParams params;
    params.num_users = 6;
    const Scenario s = generate_scenario(params);
    ScaOptions opts;
    opts.locks.allocation = true;
    const SolveReport rep = run(s, SchemeKind::Noma, opts);
    check_trace(s, SchemeKind::Noma, rep);
    const DesignPoint v0 = initialize(s, SchemeKind::Noma, opts);
    CHECK(rep.v_final.tau == v0.tau);
    CHECK(rep.v_final.p == v0.p);
}

TEST_CASE("fixed altitude/beamwidth lock keeps the pair") {
    ScenarioParams params;
    params.num_users = 6;
    const Scenario s = generate_scenario(params);
    ScaOptions opts;
    opts.locks.altitude_beamwidth = true;
    opts.fixed_sqrt_alt = 200.0;
    opts.fixed_sqrt_bw = std::atan(300.0 / 200.0);
    const SolveReport rep = run(s, SchemeKind::Noma, opts);
    check_trace(s, SchemeKind::Noma, rep);
    CHECK(rep.v_final.sq_alt == doctest::Approx(4e4).epsilon(1e-14));
    CHECK(rep.v_final.sq_bw == doctest::Approx(std::pow(std::atan(1.5), 2)).epsilon(1e-14));
    CHECK(rep.final_objective_nats() > rep.trace.front().objective_nats);

    ScaOptions bad = opts;
    bad.fixed_sqrt_alt = 10.0;  // below the altitude box
    CHECK_THROWS_AS(run(s, SchemeKind::Noma, bad), std::invalid_argument);
}

TEST_CASE("scheme dominance at the optimum") {
    ScenarioParams params;
    params.num_users = 6;
    params.seed = 12;
    const Scenario s = generate_scenario(params);
    const double noma = run(s, SchemeKind::Noma).final_objective_nats();
    const double dpc = run(s, SchemeKind::Dpc).final_objective_nats();
    CHECK(dpc >= noma - 1e-6);
}
