#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "uavrate/model.hpp"
#include "uavrate/scenario.hpp"

namespace uvr {

// Flat ordering of the natural optimization variables: [tau | p | h | theta].
struct VarLayout {
    int n_tau = 0;
    int n_p = 0;
    int tau(int i) const { return i; }
    int p(int i) const { return n_tau + i; }
    int h() const { return n_tau + n_p; }
    int theta() const { return n_tau + n_p + 1; }
    int size() const { return n_tau + n_p + 2; }
};

VarLayout layout_for(SchemeKind scheme, int num_users);
Eigen::VectorXd flatten(const DesignPoint& v, const VarLayout& ly);
DesignPoint unflatten(const Eigen::VectorXd& x, const VarLayout& ly);

// Coefficients of the tangent-plane bound
//   tau*ln(1 + 1/(x*y)) >= a + b*(2 - x/x_bar - y/y_bar) - c/tau,
// valid for all positive x, y, tau.
struct BoundCoeffs {
    double a = 0, b = 0, c = 0;
    double tau_bar = 0, x_bar = 0, y_bar = 0;
};

BoundCoeffs bound_coeffs(double tau_bar, double x_bar, double y_bar);

// Right-hand side of the bound above at (x, y, tau).
double bound_rhs(const BoundCoeffs& bc, double x, double y, double tau);

// Quarter-square majorants of the two-ratio products; all are tight when the
// arguments equal their expansion values.
double pi_term(double theta, double p, double theta_bar, double p_bar);
double phi_term(double tau, double h, double tau_bar, double h_bar, double d);

struct NuBars {
    double tau_bar = 0, p_int_bar = 0, h_bar = 0, theta_bar = 0;
    double d = 0;      // squared distance of the decoding geometry
    double sig_b = 0;  // sigma^2 * B
    double gain = 0;   // reference channel gain g
};

double nu_term(double tau, double p_int, double h, double theta, const NuBars& bars);

enum class SurrogateKind { Near, Far1, Far2, OmaNear, OmaFar };

// Concave lower bound of one user's rate, frozen at an expansion point.
// value/gradient/Hessian are taken over the flat natural vector.
struct SurrogateRate {
    SurrogateKind kind = SurrogateKind::Near;
    int user = 0;       // whose rate this bounds (0-based)
    int tau_idx = 0;    // index into the tau block
    int p_own = 0;      // index into the p block
    int p_int = -1;     // interferer index, -1 when interference-free
    double d = 0;       // decoding geometry distance, m^2

    double a = 0, b = 0, c = 0;
    double tau_bar = 0, p_own_bar = 0, p_int_bar = 0, h_bar = 0, theta_bar = 0;
    double inv_d1 = 1.0, inv_d2 = 0.0;  // reciprocal load denominators (nu)

    VarLayout ly;

    double value(const Eigen::VectorXd& x) const;
    void add_gradient(const Eigen::VectorXd& x, Eigen::VectorXd& grad) const;
    void add_hessian(const Eigen::VectorXd& x, Eigen::MatrixXd& hess) const;
};

SurrogateRate make_surrogate(const Scenario& s, const DesignPoint& expansion, SchemeKind scheme,
                             SurrogateKind kind, int k);

// Inner approximation of R <= sqrt(h)*tan(sqrt(theta)):
//   R <= gamma + alpha*h + delta*sqrt(h*theta).
// alpha and gamma are negative on (0, pi/2); satisfaction implies coverage.
struct CoverageCut {
    double alpha = 0, gamma = 0, delta = 0;
    double h_bar = 0, theta_bar = 0;
    double radius = 0;

    double rhs(double h, double theta) const;
    double slack(double h, double theta) const { return rhs(h, theta) - radius; }
};

CoverageCut coverage_cut(double h_bar, double theta_bar, double radius);

// Per-iteration concave model of all user rates plus the coverage cut.
struct SurrogateSet {
    SchemeKind scheme = SchemeKind::Noma;
    DesignPoint expansion;
    VarLayout ly;
    std::vector<SurrogateRate> rates;
    CoverageCut cut;

    // min over rate evaluators at a point (the surrogate max-min objective).
    double min_rate(const Eigen::VectorXd& x) const;
    double min_rate(const DesignPoint& v) const { return min_rate(flatten(v, ly)); }
};

SurrogateSet build_surrogates(const Scenario& s, SchemeKind scheme, const DesignPoint& expansion);

// Freeze a subset of coordinates at their expansion values: the two
// sub-optimal baseline modes from the experiments.
struct VariableLocks {
    bool altitude_beamwidth = false;  // h, theta fixed
    bool allocation = false;          // tau, p fixed
};

// Epigraph-form convex program: max t s.t. t <= each surrogate rate, the
// simplex/power equalities, box bounds, floors, and the coverage cut.
struct ConvexSubproblem {
    SurrogateSet set;
    double power_total = 0;
    double h_lo = 0, h_hi = 0;
    double theta_lo = 0, theta_hi = 0;
    bool has_cut = true;  // dropped when (h, theta) are locked
    VariableLocks locks;
};

ConvexSubproblem build_subproblem(const Scenario& s, SchemeKind scheme,
                                  const DesignPoint& expansion, VariableLocks locks = {});

}  // namespace uvr
