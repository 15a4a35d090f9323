#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "test_util.hpp"
#include "uavrate/sca.hpp"
#include "uavrate/solver.hpp"

using namespace uvr;

namespace {

Scenario k2_scenario(std::uint64_t seed = 1) {
    ScenarioParams p;
    p.num_users = 2;
    p.seed = seed;
    return generate_scenario(p);
}

}  // namespace

TEST_CASE("constant surrogate pins the epigraph value") {
    const Scenario s = k2_scenario();
    const DesignPoint v0 = initialize(s, SchemeKind::Noma);
    ConvexSubproblem sp = build_subproblem(s, SchemeKind::Noma, v0);

    SurrogateRate flat = sp.set.rates.front();
    flat.a = 1.0;
    flat.b = 0.0;
    flat.c = 0.0;
    sp.set.rates.assign(1, flat);

    const SubproblemSolution sol = solve_subproblem(sp, v0);
    CHECK(sol.epigraph_t == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(sol.surrogate_objective == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("solver output dominates the warm start") {
    for (auto scheme : {SchemeKind::Noma, SchemeKind::Dpc, SchemeKind::Oma1, SchemeKind::Oma2}) {
        const Scenario s = k2_scenario(3);
        const DesignPoint v0 = initialize(s, scheme);
        const ConvexSubproblem sp = build_subproblem(s, scheme, v0);
        const SubproblemSolution sol = solve_subproblem(sp, v0);
        const double warm = sp.set.min_rate(v0);
        CHECK(sol.surrogate_objective >= warm - 1e-12);
        CHECK(sol.status == SolveStatus::Converged);

        double sum_tau = 0, sum_p = 0;
        for (double t : sol.point.tau) sum_tau += t;
        for (double p : sol.point.p) sum_p += p;
        CHECK(std::abs(sum_tau - 1.0) <= 1e-8);
        CHECK(std::abs(sum_p - s.params.total_power_mw) <= 1e-8 * s.params.total_power_mw);
        CHECK(is_feasible(s, scheme, sol.point).ok);
        CHECK(sol.kkt_residual <= 1e-6);
    }
}

TEST_CASE("subproblem solution matches a dense grid search") {
    const Scenario s = k2_scenario(7);
    const DesignPoint v0 = initialize(s, SchemeKind::Noma);
    const ConvexSubproblem sp = build_subproblem(s, SchemeKind::Noma, v0);
    SolverOptions opts;
    const SubproblemSolution sol = solve_subproblem(sp, v0, opts);

    // tau is the scalar 1 for K=2, so the subproblem has three free axes.
    const double P = s.params.total_power_mw;
    const double pf = opts.p_floor_rel * P;
    const int n = 200;
    Eigen::VectorXd x = flatten(v0, sp.set.ly);
    double best = -1e300;
    for (int ih = 0; ih < n; ++ih) {
        const double h = sp.h_lo + (sp.h_hi - sp.h_lo) * ih / (n - 1);
        x[sp.set.ly.h()] = h;
        for (int it = 0; it < n; ++it) {
            const double th = sp.theta_lo + (sp.theta_hi - sp.theta_lo) * it / (n - 1);
            if (sp.set.cut.slack(h, th) < 0) continue;
            x[sp.set.ly.theta()] = th;
            for (int ip = 0; ip < n; ++ip) {
                const double p1 = pf + (P - 2 * pf) * ip / (n - 1);
                x[sp.set.ly.p(0)] = p1;
                x[sp.set.ly.p(1)] = P - p1;
                best = std::max(best, sp.set.min_rate(x));
            }
        }
    }
    CHECK(sol.surrogate_objective >= best * (1 - 0.01));
    CHECK(sol.surrogate_objective <= best * (1 + 0.01));
}

TEST_CASE("tightening the gap target cannot lose more than the gap") {
    const Scenario s = k2_scenario(5);
    const DesignPoint v0 = initialize(s, SchemeKind::Dpc);
    const ConvexSubproblem sp = build_subproblem(s, SchemeKind::Dpc, v0);

    SolverOptions loose;
    loose.gap_target = 1e-6;
    SolverOptions tight;
    tight.gap_target = 1e-8;
    const double f_loose = solve_subproblem(sp, v0, loose).surrogate_objective;
    const double f_tight = solve_subproblem(sp, v0, tight).surrogate_objective;
    CHECK(f_tight >= f_loose - 1e-6);
}

TEST_CASE("locked coordinates stay put") {
    const Scenario s = generate_scenario(ScenarioParams{});

    SUBCASE("altitude and beamwidth") {
        ScaOptions so;
        so.locks.altitude_beamwidth = true;
        so.fixed_sqrt_alt = 320.0;
        so.fixed_sqrt_bw = 0.8;
        const DesignPoint v0 = initialize(s, SchemeKind::Noma, so);
        VariableLocks locks;
        locks.altitude_beamwidth = true;
        const ConvexSubproblem sp = build_subproblem(s, SchemeKind::Noma, v0, locks);
        CHECK_FALSE(sp.has_cut);
        const SubproblemSolution sol = solve_subproblem(sp, v0);
        CHECK(sol.point.sq_alt == doctest::Approx(320.0 * 320.0).epsilon(1e-14));
        CHECK(sol.point.sq_bw == doctest::Approx(0.64).epsilon(1e-14));
        CHECK(sol.surrogate_objective > sp.set.min_rate(flatten(v0, sp.set.ly)));
    }
    SUBCASE("allocation") {
        const DesignPoint v0 = initialize(s, SchemeKind::Noma);
        VariableLocks locks;
        locks.allocation = true;
        const ConvexSubproblem sp = build_subproblem(s, SchemeKind::Noma, v0, locks);
        const SubproblemSolution sol = solve_subproblem(sp, v0);
        for (int i = 0; i < 10; ++i) CHECK(sol.point.tau[i] == v0.tau[i]);
        for (int i = 0; i < 20; ++i) CHECK(sol.point.p[i] == v0.p[i]);
    }
}

TEST_CASE("safeguard step accepts, backtracks or falls back") {
    const Scenario s = k2_scenario(11);
    DesignPoint v_old = initialize(s, SchemeKind::Dpc);

    SUBCASE("improving point returned unchanged") {
        const ConvexSubproblem sp = build_subproblem(s, SchemeKind::Dpc, v_old);
        const DesignPoint v_new = solve_subproblem(sp, v_old).point;
        const DesignPoint out = safeguard_step(s, SchemeKind::Dpc, v_old, v_new);
        CHECK(out.p == v_new.p);
        CHECK(out.sq_alt == v_new.sq_alt);
    }
    SUBCASE("no-op when the candidate equals the incumbent") {
        const DesignPoint out = safeguard_step(s, SchemeKind::Dpc, v_old, v_old);
        CHECK(out.p == v_old.p);
    }
    SUBCASE("strictly downhill direction falls back to the incumbent") {
        // Put the incumbent at the max-min power crossing, then push all power
        // to the near user: the objective decreases along the whole segment.
        double lo = 0.0, hi = s.params.total_power_mw;
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            DesignPoint v = v_old;
            v.p = {mid, s.params.total_power_mw - mid};
            const RateBreakdown rb = objective(s, SchemeKind::Dpc, v);
            (rb.rates[0] < rb.rates[1] ? lo : hi) = mid;
        }
        v_old.p = {lo, s.params.total_power_mw - lo};
        DesignPoint v_new = v_old;
        v_new.p = {s.params.total_power_mw * (1 - 1e-9), s.params.total_power_mw * 1e-9};
        const DesignPoint out = safeguard_step(s, SchemeKind::Dpc, v_old, v_new);
        CHECK(out.p == v_old.p);
    }
}

TEST_CASE("infeasible warm start is rejected") {
    const Scenario s = k2_scenario();
    const DesignPoint v0 = initialize(s, SchemeKind::Noma);
    const ConvexSubproblem sp = build_subproblem(s, SchemeKind::Noma, v0);
    DesignPoint bad = v0;
    bad.sq_alt = sp.h_lo;  // far below the cut at this expansion point
    bad.sq_bw = sp.theta_lo;
    CHECK_THROWS_AS(solve_subproblem(sp, bad), std::invalid_argument);
}
