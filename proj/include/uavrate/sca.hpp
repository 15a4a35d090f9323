#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "uavrate/solver.hpp"

namespace uvr {

// No (h, theta) pair inside the bounds can cover the cell.
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ScaOptions {
    int max_outer_iters = 200;
    double rel_tol = 1e-5;  // on |f(k+1) - f(k)| / max(1, |f(k)|)
    double initial_beamwidth_rad = 0.7853981633974483;  // pi/4
    SolverOptions solver;
    VariableLocks locks;
    // Used only when locks.altitude_beamwidth is set.
    double fixed_sqrt_alt = 0.0;
    double fixed_sqrt_bw = 0.0;
};

struct IterationRecord {
    int kappa = 0;
    double objective_nats = 0.0;
    double objective_mbps = 0.0;
    double surrogate_objective = 0.0;
    std::vector<double> rates;
    int min_user = -1;
    SolveStatus solver_status = SolveStatus::Converged;
    int newton_steps = 0;
    double wall_ms = 0.0;
};

struct SolveReport {
    SchemeKind scheme = SchemeKind::Noma;
    std::string scenario_digest;
    DesignPoint v_final;
    std::vector<IterationRecord> trace;
    std::vector<DesignPoint> iterates;  // one per trace record
    std::string termination;  // "converged" | "max_iterations"

    double final_objective_nats() const { return trace.back().objective_nats; }
    double final_objective_mbps() const { return trace.back().objective_mbps; }
    int iterations() const { return trace.back().kappa; }
};

// Equal power/bandwidth split, beamwidth at the configured start value, and
// altitude from the coverage feasibility problem (widening the beamwidth in
// 0.05 rad steps when the altitude box alone cannot cover the cell).
// Throws InfeasibleError when no in-bounds pair covers the cell.
DesignPoint initialize(const Scenario& s, SchemeKind scheme, const ScaOptions& opts = {});

// Path-following loop: build surrogates at the current point, solve the
// convex subproblem warm-started there, safeguard, record, repeat until the
// relative objective change drops below rel_tol.
SolveReport run(const Scenario& s, SchemeKind scheme, const ScaOptions& opts = {});

}  // namespace uvr
