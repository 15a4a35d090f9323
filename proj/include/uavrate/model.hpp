#pragma once

#include <string>
#include <utility>
#include <vector>

#include "uavrate/scenario.hpp"

namespace uvr {

enum class SchemeKind { Noma, Dpc, Oma1, Oma2 };

const char* to_string(SchemeKind s);
SchemeKind scheme_from_string(const std::string& name);

// Bandwidth-fraction vector length for a scheme: K for OMA-1, K/2 otherwise.
int n_tau_for(SchemeKind s, int num_users);

// One candidate solution in the squared-variable convention: sq_alt is the
// squared altitude (m^2) and sq_bw the squared beamwidth (rad^2).
struct DesignPoint {
    std::vector<double> tau;  // bandwidth fractions, sum 1
    std::vector<double> p;    // per-user power, mW, sum P
    double sq_alt = 0.0;
    double sq_bw = 0.0;
};

struct RateBreakdown {
    std::vector<double> rates;   // per-user rate, nats/s/Hz, length K
    std::vector<double> far_r1;  // NOMA only: cross-decoding component per pair
    std::vector<double> far_r2;  // NOMA only: own-decoding component per pair
    double min_rate = 0.0;
    int min_user = -1;  // 0-based
};

struct FeasibilityReport {
    bool ok = true;
    std::vector<std::string> violations;
};

// g / (theta * (d + h)); free-space LoS with path-loss exponent 2.
double channel_gain(double sq_dist, double sq_alt, double sq_bw, double ref_gain);

// Shared rate kernel tau * ln(1 + g*p_own / (sigB*tau*theta*(d+h) + g*p_int)).
// Returns the limit 0 when tau or p_own is zero.
double pair_rate(double tau, double p_own, double p_int, double sq_dist, double sq_alt,
                 double sq_bw, double sig_b, double ref_gain);

// Near-user rate (no interference after SIC); k indexes the near set.
double rate_near(const Scenario& s, const DesignPoint& v, int k);
// Far user decoding its own message under the near user's interference.
double rate_far_own(const Scenario& s, const DesignPoint& v, int k);
// Near user decoding the far user's message (same load, near geometry).
double rate_far_cross(const Scenario& s, const DesignPoint& v, int k);
// NOMA far-user rate: min(rate_far_cross, rate_far_own).
double rate_far(const Scenario& s, const DesignPoint& v, int k);
// OMA-2 pair rates: both members interfere inside the shared partition.
std::pair<double, double> rate_oma_pair(const Scenario& s, const DesignPoint& v, int k);

RateBreakdown objective(const Scenario& s, SchemeKind scheme, const DesignPoint& v);

// DesignPoint invariants plus the coverage condition R <= sqrt(h)*tan(sqrt(theta)).
FeasibilityReport is_feasible(const Scenario& s, SchemeKind scheme, const DesignPoint& v,
                              double tol = 1e-8);

inline double to_mbps(double rate_nats, double bandwidth_hz) {
    return rate_nats * bandwidth_hz / 0.6931471805599453 / 1e6;
}

}  // namespace uvr
