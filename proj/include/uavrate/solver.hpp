#pragma once

#include <string>

#include "uavrate/surrogate.hpp"

namespace uvr {

struct SolverOptions {
    double barrier_weight = 1.0;       // initial mu
    double barrier_decrease = 0.2;     // mu multiplier per stage, in (0,1)
    double newton_tol = 1e-13;         // centering stop on lambda^2/2
    int max_newton_steps = 60;         // per barrier stage
    double gap_target = 1e-8;          // stop when m*mu falls below this
    double tau_floor = 1e-4;
    double p_floor_rel = 1e-6;         // floor = p_floor_rel * P
};

enum class SolveStatus { Converged, MaxIterations, Numerical };

const char* to_string(SolveStatus s);

struct SubproblemSolution {
    DesignPoint point;
    double epigraph_t = 0.0;
    SolveStatus status = SolveStatus::Converged;
    double surrogate_objective = 0.0;  // min over surrogate rates at `point`
    double kkt_residual = 0.0;         // Newton-decrement norm, scaled variables
    int newton_steps = 0;
};

// Maximize t over { t <= each surrogate rate } + simplex/power equalities,
// box bounds, variable floors and the coverage cut. Interior-point log
// barrier with Newton centering; equalities eliminated by null-space
// reduction. The warm start is floored/pulled strictly inside first. The
// returned surrogate objective never falls below the warm start's.
SubproblemSolution solve_subproblem(const ConvexSubproblem& sp, const DesignPoint& warm_start,
                                    const SolverOptions& opts = {});

// Accept v_new if it does not decrease the exact objective; otherwise
// backtrack along [v_old, v_new] with factors 1/2 ... 1/256, falling back to
// v_old. Keeps the outer ascent chain monotone under solver noise.
DesignPoint safeguard_step(const Scenario& s, SchemeKind scheme, const DesignPoint& v_old,
                           const DesignPoint& v_new);

}  // namespace uvr
