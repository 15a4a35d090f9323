#include "uavrate/model.hpp"

#include <cmath>
#include <stdexcept>

namespace uvr {

const char* to_string(SchemeKind s) {
    switch (s) {
        case SchemeKind::Noma: return "noma";
        case SchemeKind::Dpc: return "dpc";
        case SchemeKind::Oma1: return "oma1";
        case SchemeKind::Oma2: return "oma2";
    }
    return "?";
}

SchemeKind scheme_from_string(const std::string& name) {
    if (name == "noma") return SchemeKind::Noma;
    if (name == "dpc") return SchemeKind::Dpc;
    if (name == "oma1" || name == "oma-1") return SchemeKind::Oma1;
    if (name == "oma2" || name == "oma-2") return SchemeKind::Oma2;
    throw std::invalid_argument("unknown scheme: " + name);
}

int n_tau_for(SchemeKind s, int num_users) {
    return s == SchemeKind::Oma1 ? num_users : num_users / 2;
}

double channel_gain(double sq_dist, double sq_alt, double sq_bw, double ref_gain) {
    if (!(sq_bw > 0)) throw std::domain_error("channel_gain: sq_bw must be > 0");
    if (!(sq_dist + sq_alt > 0)) throw std::domain_error("channel_gain: d + h must be > 0");
    return ref_gain / (sq_bw * (sq_dist + sq_alt));
}

double pair_rate(double tau, double p_own, double p_int, double sq_dist, double sq_alt,
                 double sq_bw, double sig_b, double ref_gain) {
    if (!(sq_bw > 0)) throw std::domain_error("pair_rate: sq_bw must be > 0");
    if (!(sq_dist + sq_alt > 0)) throw std::domain_error("pair_rate: d + h must be > 0");
    if (p_own <= 0 || tau <= 0) return 0.0;
    const double den = sig_b * tau * sq_bw * (sq_dist + sq_alt) + ref_gain * p_int;
    return tau * std::log1p(ref_gain * p_own / den);
}

namespace {

void check_near_index(const Scenario& s, int k) {
    if (k < 0 || k >= s.num_pairs())
        throw std::invalid_argument("pair index out of range: " + std::to_string(k));
}

}  // namespace

double rate_near(const Scenario& s, const DesignPoint& v, int k) {
    check_near_index(s, k);
    return pair_rate(v.tau[k], v.p[k], 0.0, s.sq_dist[k], v.sq_alt, v.sq_bw,
                     s.noise_power_total, s.params.ref_gain);
}

double rate_far_own(const Scenario& s, const DesignPoint& v, int k) {
    check_near_index(s, k);
    const int j = s.pairing[k];
    return pair_rate(v.tau[k], v.p[j], v.p[k], s.sq_dist[j], v.sq_alt, v.sq_bw,
                     s.noise_power_total, s.params.ref_gain);
}

double rate_far_cross(const Scenario& s, const DesignPoint& v, int k) {
    check_near_index(s, k);
    const int j = s.pairing[k];
    return pair_rate(v.tau[k], v.p[j], v.p[k], s.sq_dist[k], v.sq_alt, v.sq_bw,
                     s.noise_power_total, s.params.ref_gain);
}

double rate_far(const Scenario& s, const DesignPoint& v, int k) {
    return std::min(rate_far_cross(s, v, k), rate_far_own(s, v, k));
}

std::pair<double, double> rate_oma_pair(const Scenario& s, const DesignPoint& v, int k) {
    check_near_index(s, k);
    const int j = s.pairing[k];
    const double near = pair_rate(v.tau[k], v.p[k], v.p[j], s.sq_dist[k], v.sq_alt, v.sq_bw,
                                  s.noise_power_total, s.params.ref_gain);
    const double far = pair_rate(v.tau[k], v.p[j], v.p[k], s.sq_dist[j], v.sq_alt, v.sq_bw,
                                 s.noise_power_total, s.params.ref_gain);
    return {near, far};
}

RateBreakdown objective(const Scenario& s, SchemeKind scheme, const DesignPoint& v) {
    const int K = s.params.num_users;
    const int half = K / 2;
    if (static_cast<int>(v.p.size()) != K ||
        static_cast<int>(v.tau.size()) != n_tau_for(scheme, K))
        throw std::invalid_argument("objective: design point dimensions do not match scheme");

    RateBreakdown out;
    out.rates.assign(K, 0.0);
    switch (scheme) {
        case SchemeKind::Noma:
            out.far_r1.resize(half);
            out.far_r2.resize(half);
            for (int k = 0; k < half; ++k) {
                out.rates[k] = rate_near(s, v, k);
                out.far_r1[k] = rate_far_cross(s, v, k);
                out.far_r2[k] = rate_far_own(s, v, k);
                out.rates[s.pairing[k]] = std::min(out.far_r1[k], out.far_r2[k]);
            }
            break;
        case SchemeKind::Dpc:
            for (int k = 0; k < half; ++k) {
                out.rates[k] = rate_near(s, v, k);
                out.rates[s.pairing[k]] = rate_far_own(s, v, k);
            }
            break;
        case SchemeKind::Oma1:
            for (int k = 0; k < K; ++k)
                out.rates[k] = pair_rate(v.tau[k], v.p[k], 0.0, s.sq_dist[k], v.sq_alt, v.sq_bw,
                                         s.noise_power_total, s.params.ref_gain);
            break;
        case SchemeKind::Oma2:
            for (int k = 0; k < half; ++k) {
                const auto [near, far] = rate_oma_pair(s, v, k);
                out.rates[k] = near;
                out.rates[s.pairing[k]] = far;
            }
            break;
    }

    out.min_user = 0;
    out.min_rate = out.rates[0];
    for (int k = 1; k < K; ++k) {
        if (out.rates[k] < out.min_rate) {
            out.min_rate = out.rates[k];
            out.min_user = k;
        }
    }
    return out;
}

FeasibilityReport is_feasible(const Scenario& s, SchemeKind scheme, const DesignPoint& v,
                              double tol) {
    FeasibilityReport rep;
    auto fail = [&](const std::string& msg) {
        rep.ok = false;
        rep.violations.push_back(msg);
    };
    const int K = s.params.num_users;
    const int nt = n_tau_for(scheme, K);
    if (static_cast<int>(v.tau.size()) != nt || static_cast<int>(v.p.size()) != K) {
        fail("dimensions: tau/p sizes do not match scheme");
        return rep;
    }

    double sum_tau = 0;
    for (int i = 0; i < nt; ++i) {
        if (v.tau[i] < -tol) fail("tau: entry " + std::to_string(i + 1) + " negative");
        sum_tau += v.tau[i];
    }
    if (std::abs(sum_tau - 1.0) > tol) fail("tau: simplex sum differs from 1");

    double sum_p = 0;
    const double P = s.params.total_power_mw;
    for (int i = 0; i < K; ++i) {
        if (v.p[i] < -tol * P) fail("p: entry " + std::to_string(i + 1) + " negative");
        sum_p += v.p[i];
    }
    if (std::abs(sum_p - P) > tol * P) fail("p: power sum differs from total_power_mw");

    const double h_lo = s.params.altitude_min_m * s.params.altitude_min_m;
    const double h_hi = s.params.altitude_max_m * s.params.altitude_max_m;
    const double th_lo = s.params.beamwidth_min_rad * s.params.beamwidth_min_rad;
    const double th_hi = s.params.beamwidth_max_rad * s.params.beamwidth_max_rad;
    if (v.sq_alt < h_lo - tol * h_hi || v.sq_alt > h_hi * (1 + tol))
        fail("sq_alt: outside altitude bounds");
    if (v.sq_bw < th_lo - tol * th_hi || v.sq_bw > th_hi * (1 + tol))
        fail("sq_bw: outside beamwidth bounds");

    if (v.sq_alt > 0 && v.sq_bw > 0) {
        const double reach = std::sqrt(v.sq_alt) * std::tan(std::sqrt(v.sq_bw));
        if (reach < s.params.cell_radius_m * (1 - tol) - tol)
            fail("coverage: R > sqrt(h)*tan(sqrt(theta))");
    } else {
        fail("coverage: sq_alt and sq_bw must be positive");
    }
    return rep;
}

}  // namespace uvr
