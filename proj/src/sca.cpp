#include "uavrate/sca.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace uvr {

namespace {

double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

// Overrelaxation candidate v_old + beta * (v_new - v_old), projected back onto
// the simplexes, the boxes and the exact coverage region. The quarter-square
// majorants contract the per-iteration movement of h; stretching the accepted
// step (and keeping it only when it improves the exact objective) removes the
// long geometric tail without touching the ascent or feasibility guarantees.
bool extrapolate_candidate(const Scenario& s, const ScaOptions& opts, const DesignPoint& v_old,
                           const DesignPoint& v_new, double beta, DesignPoint& out) {
    DesignPoint v = v_new;
    if (!opts.locks.allocation) {
        double sum = 0;
        for (std::size_t i = 0; i < v.tau.size(); ++i) {
            v.tau[i] = std::max(0.0, v_old.tau[i] + beta * (v_new.tau[i] - v_old.tau[i]));
            sum += v.tau[i];
        }
        if (!(sum > 0)) return false;
        for (auto& t : v.tau) t /= sum;
        sum = 0;
        for (std::size_t i = 0; i < v.p.size(); ++i) {
            v.p[i] = std::max(0.0, v_old.p[i] + beta * (v_new.p[i] - v_old.p[i]));
            sum += v.p[i];
        }
        if (!(sum > 0)) return false;
        for (auto& p : v.p) p *= s.params.total_power_mw / sum;
    }
    if (!opts.locks.altitude_beamwidth) {
        const double h_lo = s.params.altitude_min_m * s.params.altitude_min_m;
        const double h_hi = s.params.altitude_max_m * s.params.altitude_max_m;
        const double th_lo = s.params.beamwidth_min_rad * s.params.beamwidth_min_rad;
        const double th_hi = s.params.beamwidth_max_rad * s.params.beamwidth_max_rad;
        v.sq_alt = clamp(v_old.sq_alt + beta * (v_new.sq_alt - v_old.sq_alt), h_lo, h_hi);
        v.sq_bw = clamp(v_old.sq_bw + beta * (v_new.sq_bw - v_old.sq_bw), th_lo, th_hi);
        // The straight line can leave the (non-convex) coverage region; lift
        // the altitude back onto the boundary when it does.
        const double h_need =
            std::pow(s.params.cell_radius_m / std::tan(std::sqrt(v.sq_bw)), 2);
        if (v.sq_alt < h_need) {
            if (h_need > h_hi) return false;
            v.sq_alt = h_need;
        }
    }
    out = std::move(v);
    return true;
}

}  // namespace

DesignPoint initialize(const Scenario& s, SchemeKind scheme, const ScaOptions& opts) {
    const int K = s.params.num_users;
    const int nt = n_tau_for(scheme, K);

    DesignPoint v;
    v.p.assign(K, s.params.total_power_mw / K);
    v.tau.assign(nt, 1.0 / nt);

    const double h_lo = s.params.altitude_min_m * s.params.altitude_min_m;
    const double h_hi = s.params.altitude_max_m * s.params.altitude_max_m;
    const double R = s.params.cell_radius_m;

    if (opts.locks.altitude_beamwidth) {
        // Fixed-(h, theta) baseline: the pair is given, the coverage search is
        // skipped (the subproblem drops the cut as well).
        const double sa = opts.fixed_sqrt_alt, sb = opts.fixed_sqrt_bw;
        if (!(sa >= s.params.altitude_min_m) || !(sa <= s.params.altitude_max_m) ||
            !(sb >= s.params.beamwidth_min_rad) || !(sb <= s.params.beamwidth_max_rad))
            throw std::invalid_argument("initialize: fixed altitude/beamwidth out of bounds");
        v.sq_alt = sa * sa;
        v.sq_bw = sb * sb;
        return v;
    }

    double bw = clamp(opts.initial_beamwidth_rad, s.params.beamwidth_min_rad,
                      s.params.beamwidth_max_rad);
    auto altitude_for = [&](double beam) {
        const double want = R / std::tan(beam);
        return clamp(want * want, h_lo, h_hi);
    };
    double h0 = altitude_for(bw);
    if (R > std::sqrt(h0) * std::tan(bw) * (1 + 1e-12)) {
        // Altitude box alone cannot reach coverage; widen the beam.
        bool ok = false;
        while (bw < s.params.beamwidth_max_rad) {
            bw = std::min(bw + 0.05, s.params.beamwidth_max_rad);
            if (R <= s.params.altitude_max_m * std::tan(bw)) {
                ok = true;
                break;
            }
        }
        if (!ok)
            throw InfeasibleError(
                "scenario infeasible: no altitude/beamwidth in bounds covers the cell radius");
        h0 = altitude_for(bw);
    }
    v.sq_alt = h0;
    v.sq_bw = bw * bw;
    return v;
}

SolveReport run(const Scenario& s, SchemeKind scheme, const ScaOptions& opts) {
    {
        const auto bad = validate_scenario(s);
        if (!bad.empty())
            throw std::invalid_argument("run: invalid scenario: " + bad.front());
    }
    if (!(opts.rel_tol > 0) || opts.max_outer_iters < 1)
        throw std::invalid_argument("run: invalid sca options");

    using clock = std::chrono::steady_clock;
    const double B = s.params.total_bandwidth_hz;

    SolveReport report;
    report.scheme = scheme;
    report.scenario_digest = scenario_digest(s);

    DesignPoint v = initialize(s, scheme, opts);
    RateBreakdown rb = objective(s, scheme, v);

    IterationRecord rec;
    rec.kappa = 0;
    rec.objective_nats = rb.min_rate;
    rec.objective_mbps = to_mbps(rb.min_rate, B);
    rec.surrogate_objective = rb.min_rate;  // surrogates are tight at the expansion point
    rec.rates = rb.rates;
    rec.min_user = rb.min_user;
    report.trace.push_back(rec);
    report.iterates.push_back(v);

    report.termination = "max_iterations";
    double f_prev = rb.min_rate;
    for (int kappa = 1; kappa <= opts.max_outer_iters; ++kappa) {
        const auto t0 = clock::now();
        const ConvexSubproblem sp = build_subproblem(s, scheme, v, opts.locks);
        const SubproblemSolution sol = solve_subproblem(sp, v, opts.solver);
        const DesignPoint v_base = safeguard_step(s, scheme, v, sol.point);
        DesignPoint v_next = v_base;
        double f_next = objective(s, scheme, v_next).min_rate;
        for (double beta : {2.0, 4.0, 8.0}) {
            DesignPoint cand;
            if (!extrapolate_candidate(s, opts, v, v_base, beta, cand)) continue;
            if (!is_feasible(s, scheme, cand).ok) continue;
            const double f_cand = objective(s, scheme, cand).min_rate;
            if (f_cand > f_next) {
                v_next = std::move(cand);
                f_next = f_cand;
            }
        }
        v = std::move(v_next);
        rb = objective(s, scheme, v);
        const auto t1 = clock::now();

        rec = IterationRecord{};
        rec.kappa = kappa;
        rec.objective_nats = rb.min_rate;
        rec.objective_mbps = to_mbps(rb.min_rate, B);
        rec.surrogate_objective = sol.surrogate_objective;
        rec.rates = rb.rates;
        rec.min_user = rb.min_user;
        rec.solver_status = sol.status;
        rec.newton_steps = sol.newton_steps;
        rec.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        report.trace.push_back(rec);
        report.iterates.push_back(v);

        const bool done = std::abs(rb.min_rate - f_prev) / std::max(1.0, std::abs(f_prev)) <
                          opts.rel_tol;
        f_prev = rb.min_rate;
        if (done) {
            report.termination = "converged";
            break;
        }
    }
    report.v_final = v;
    return report;
}

}  // namespace uvr
