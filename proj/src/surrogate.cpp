#include "uavrate/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace uvr {

VarLayout layout_for(SchemeKind scheme, int num_users) {
    VarLayout ly;
    ly.n_tau = n_tau_for(scheme, num_users);
    ly.n_p = num_users;
    return ly;
}

Eigen::VectorXd flatten(const DesignPoint& v, const VarLayout& ly) {
    if (static_cast<int>(v.tau.size()) != ly.n_tau || static_cast<int>(v.p.size()) != ly.n_p)
        throw std::invalid_argument("flatten: design point does not match layout");
    Eigen::VectorXd x(ly.size());
    for (int i = 0; i < ly.n_tau; ++i) x[ly.tau(i)] = v.tau[i];
    for (int i = 0; i < ly.n_p; ++i) x[ly.p(i)] = v.p[i];
    x[ly.h()] = v.sq_alt;
    x[ly.theta()] = v.sq_bw;
    return x;
}

DesignPoint unflatten(const Eigen::VectorXd& x, const VarLayout& ly) {
    DesignPoint v;
    v.tau.resize(ly.n_tau);
    v.p.resize(ly.n_p);
    for (int i = 0; i < ly.n_tau; ++i) v.tau[i] = x[ly.tau(i)];
    for (int i = 0; i < ly.n_p; ++i) v.p[i] = x[ly.p(i)];
    v.sq_alt = x[ly.h()];
    v.sq_bw = x[ly.theta()];
    return v;
}

BoundCoeffs bound_coeffs(double tau_bar, double x_bar, double y_bar) {
    if (!(tau_bar > 0) || !(x_bar > 0) || !(y_bar > 0))
        throw std::domain_error("bound_coeffs: expansion values must be positive");
    const double log_term = std::log1p(1.0 / (x_bar * y_bar));
    BoundCoeffs bc;
    bc.a = 2.0 * tau_bar * log_term;
    bc.b = tau_bar / (1.0 + x_bar * y_bar);
    bc.c = tau_bar * tau_bar * log_term;
    bc.tau_bar = tau_bar;
    bc.x_bar = x_bar;
    bc.y_bar = y_bar;
    return bc;
}

double bound_rhs(const BoundCoeffs& bc, double x, double y, double tau) {
    return bc.a + bc.b * (2.0 - x / bc.x_bar - y / bc.y_bar) - bc.c / tau;
}

double pi_term(double theta, double p, double theta_bar, double p_bar) {
    if (!(theta > 0) || !(p > 0) || !(theta_bar > 0) || !(p_bar > 0))
        throw std::domain_error("pi_term: arguments must be positive");
    const double u = theta / theta_bar + p_bar / p;
    return 0.25 * u * u;
}

double phi_term(double tau, double h, double tau_bar, double h_bar, double d) {
    if (!(tau_bar > 0) || !(d + h_bar > 0))
        throw std::domain_error("phi_term: expansion values must be positive");
    const double u = tau / tau_bar + (d + h) / (d + h_bar);
    return 0.25 * u * u;
}

double nu_term(double tau, double p_int, double h, double theta, const NuBars& bars) {
    if (!(theta > 0)) throw std::domain_error("nu_term: theta must be positive");
    if (!(bars.tau_bar > 0) || !(bars.p_int_bar > 0) || !(bars.theta_bar > 0) ||
        !(bars.d + bars.h_bar > 0) || !(bars.sig_b > 0) || !(bars.gain > 0))
        throw std::domain_error("nu_term: expansion values must be positive");
    const double load = bars.gain * bars.p_int_bar /
                        (bars.sig_b * bars.theta_bar * bars.tau_bar * (bars.d + bars.h_bar));
    const double d1 = 1.0 + load;
    const double d2 = 1.0 / load + 1.0;
    const double q1 = tau / bars.tau_bar + (bars.d + h) / (bars.d + bars.h_bar);
    const double q2 = p_int / bars.p_int_bar + bars.theta_bar / theta;
    return 0.25 * q1 * q1 / d1 + 0.25 * q2 * q2 / d2;
}

double SurrogateRate::value(const Eigen::VectorXd& x) const {
    const double tau = x[ly.tau(tau_idx)];
    const double po = x[ly.p(p_own)];
    const double h = x[ly.h()];
    const double theta = x[ly.theta()];

    const double u = theta / theta_bar + p_own_bar / po;
    const double pi_v = 0.25 * u * u;
    const double q1 = tau / tau_bar + (d + h) / (d + h_bar);
    double load = 0.25 * q1 * q1 * inv_d1;
    if (p_int >= 0) {
        const double q2 = x[ly.p(p_int)] / p_int_bar + theta_bar / theta;
        load += 0.25 * q2 * q2 * inv_d2;
    }
    return a + b * (2.0 - pi_v - load) - c / tau;
}

void SurrogateRate::add_gradient(const Eigen::VectorXd& x, Eigen::VectorXd& grad) const {
    const int it = ly.tau(tau_idx), io = ly.p(p_own), ih = ly.h(), ith = ly.theta();
    const double tau = x[it], po = x[io], h = x[ih], theta = x[ith];

    grad[it] += c / (tau * tau);

    const double u = theta / theta_bar + p_own_bar / po;
    grad[ith] += -0.5 * b * u / theta_bar;
    grad[io] += 0.5 * b * u * p_own_bar / (po * po);

    const double beta1 = b * inv_d1;
    const double q1 = tau / tau_bar + (d + h) / (d + h_bar);
    grad[it] += -0.5 * beta1 * q1 / tau_bar;
    grad[ih] += -0.5 * beta1 * q1 / (d + h_bar);

    if (p_int >= 0) {
        const int ii = ly.p(p_int);
        const double beta2 = b * inv_d2;
        const double q2 = x[ii] / p_int_bar + theta_bar / theta;
        grad[ii] += -0.5 * beta2 * q2 / p_int_bar;
        grad[ith] += 0.5 * beta2 * q2 * theta_bar / (theta * theta);
    }
}

void SurrogateRate::add_hessian(const Eigen::VectorXd& x, Eigen::MatrixXd& hess) const {
    const int it = ly.tau(tau_idx), io = ly.p(p_own), ih = ly.h(), ith = ly.theta();
    const double tau = x[it], po = x[io], theta = x[ith];

    hess(it, it) += -2.0 * c / (tau * tau * tau);

    const double u = theta / theta_bar + p_own_bar / po;
    const double po2 = po * po;
    hess(ith, ith) += -0.5 * b / (theta_bar * theta_bar);
    const double cross = 0.5 * b * p_own_bar / (theta_bar * po2);
    hess(ith, io) += cross;
    hess(io, ith) += cross;
    hess(io, io) += -0.5 * b * p_own_bar * p_own_bar / (po2 * po2) -
                    b * u * p_own_bar / (po2 * po);

    const double beta1 = b * inv_d1;
    const double dh = d + h_bar;
    hess(it, it) += -0.5 * beta1 / (tau_bar * tau_bar);
    const double c1 = -0.5 * beta1 / (tau_bar * dh);
    hess(it, ih) += c1;
    hess(ih, it) += c1;
    hess(ih, ih) += -0.5 * beta1 / (dh * dh);

    if (p_int >= 0) {
        const int ii = ly.p(p_int);
        const double beta2 = b * inv_d2;
        const double q2 = x[ii] / p_int_bar + theta_bar / theta;
        const double th2 = theta * theta;
        hess(ii, ii) += -0.5 * beta2 / (p_int_bar * p_int_bar);
        const double c2 = 0.5 * beta2 * theta_bar / (p_int_bar * th2);
        hess(ii, ith) += c2;
        hess(ith, ii) += c2;
        hess(ith, ith) += -0.5 * beta2 * theta_bar * theta_bar / (th2 * th2) -
                          beta2 * q2 * theta_bar / (th2 * theta);
    }
}

SurrogateRate make_surrogate(const Scenario& s, const DesignPoint& expansion, SchemeKind scheme,
                             SurrogateKind kind, int k) {
    const int half = s.num_pairs();
    const bool oma1 = scheme == SchemeKind::Oma1;
    if (k < 0 || k >= (oma1 ? s.params.num_users : half))
        throw std::invalid_argument("make_surrogate: index out of range");

    SurrogateRate sr;
    sr.kind = kind;
    sr.ly = layout_for(scheme, s.params.num_users);
    sr.tau_idx = k;

    const int j = oma1 ? -1 : s.pairing[k];
    switch (kind) {
        case SurrogateKind::Near:
            sr.user = k;
            sr.p_own = k;
            sr.p_int = -1;
            sr.d = s.sq_dist[k];
            break;
        case SurrogateKind::Far1:
            sr.user = j;
            sr.p_own = j;
            sr.p_int = k;
            sr.d = s.sq_dist[k];
            break;
        case SurrogateKind::Far2:
            sr.user = j;
            sr.p_own = j;
            sr.p_int = k;
            sr.d = s.sq_dist[j];
            break;
        case SurrogateKind::OmaNear:
            sr.user = k;
            sr.p_own = k;
            sr.p_int = j;
            sr.d = s.sq_dist[k];
            break;
        case SurrogateKind::OmaFar:
            sr.user = j;
            sr.p_own = j;
            sr.p_int = k;
            sr.d = s.sq_dist[j];
            break;
    }

    sr.tau_bar = expansion.tau[sr.tau_idx];
    sr.p_own_bar = expansion.p[sr.p_own];
    sr.h_bar = expansion.sq_alt;
    sr.theta_bar = expansion.sq_bw;

    const double sig_b = s.noise_power_total;
    const double g = s.params.ref_gain;
    if (!(sr.tau_bar > 0) || !(sr.p_own_bar > 0) || !(sr.theta_bar > 0) ||
        !(sr.d + sr.h_bar > 0))
        throw std::domain_error("make_surrogate: expansion point must be strictly positive");

    const double x_bar = sig_b * sr.theta_bar / (g * sr.p_own_bar);
    double y_bar = sr.tau_bar * (sr.d + sr.h_bar);
    if (sr.p_int >= 0) {
        sr.p_int_bar = expansion.p[sr.p_int];
        if (!(sr.p_int_bar > 0))
            throw std::domain_error("make_surrogate: interferer expansion power must be positive");
        const double load = g * sr.p_int_bar / (sig_b * sr.theta_bar);
        y_bar += load;
        const double ratio = load / (sr.tau_bar * (sr.d + sr.h_bar));
        sr.inv_d1 = 1.0 / (1.0 + ratio);
        sr.inv_d2 = ratio / (1.0 + ratio);
    } else {
        sr.inv_d1 = 1.0;
        sr.inv_d2 = 0.0;
    }

    const BoundCoeffs bc = bound_coeffs(sr.tau_bar, x_bar, y_bar);
    sr.a = bc.a;
    sr.b = bc.b;
    sr.c = bc.c;
    return sr;
}

CoverageCut coverage_cut(double h_bar, double theta_bar, double radius) {
    if (!(h_bar > 0)) throw std::domain_error("coverage_cut: h_bar must be positive");
    const double st = std::sqrt(theta_bar);
    if (!(st > 0) || st >= M_PI / 2)
        throw std::domain_error("coverage_cut: sqrt(theta_bar) must lie in (0, pi/2)");
    const double sh = std::sqrt(h_bar);
    const double cos_st = std::cos(st);
    const double c2 = cos_st * cos_st;
    const double slope = (std::sin(st) * cos_st - st) / c2;  // < 0 on (0, pi/2)

    CoverageCut cut;
    cut.alpha = slope / (2.0 * sh);
    cut.gamma = slope * sh / 2.0;
    cut.delta = 1.0 / c2;
    cut.h_bar = h_bar;
    cut.theta_bar = theta_bar;
    cut.radius = radius;
    return cut;
}

double CoverageCut::rhs(double h, double theta) const {
    return gamma + alpha * h + delta * std::sqrt(h * theta);
}

double SurrogateSet::min_rate(const Eigen::VectorXd& x) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& r : rates) best = std::min(best, r.value(x));
    return best;
}

SurrogateSet build_surrogates(const Scenario& s, SchemeKind scheme, const DesignPoint& expansion) {
    SurrogateSet set;
    set.scheme = scheme;
    set.expansion = expansion;
    set.ly = layout_for(scheme, s.params.num_users);
    if (static_cast<int>(expansion.tau.size()) != set.ly.n_tau ||
        static_cast<int>(expansion.p.size()) != set.ly.n_p)
        throw std::invalid_argument("build_surrogates: expansion point does not match scheme");

    const int half = s.num_pairs();
    switch (scheme) {
        case SchemeKind::Noma:
            for (int k = 0; k < half; ++k) {
                set.rates.push_back(make_surrogate(s, expansion, scheme, SurrogateKind::Near, k));
                set.rates.push_back(make_surrogate(s, expansion, scheme, SurrogateKind::Far1, k));
                set.rates.push_back(make_surrogate(s, expansion, scheme, SurrogateKind::Far2, k));
            }
            break;
        case SchemeKind::Dpc:
            for (int k = 0; k < half; ++k) {
                set.rates.push_back(make_surrogate(s, expansion, scheme, SurrogateKind::Near, k));
                set.rates.push_back(make_surrogate(s, expansion, scheme, SurrogateKind::Far2, k));
            }
            break;
        case SchemeKind::Oma1:
            for (int k = 0; k < s.params.num_users; ++k)
                set.rates.push_back(make_surrogate(s, expansion, scheme, SurrogateKind::Near, k));
            break;
        case SchemeKind::Oma2:
            for (int k = 0; k < half; ++k) {
                set.rates.push_back(
                    make_surrogate(s, expansion, scheme, SurrogateKind::OmaNear, k));
                set.rates.push_back(make_surrogate(s, expansion, scheme, SurrogateKind::OmaFar, k));
            }
            break;
    }
    set.cut = coverage_cut(expansion.sq_alt, expansion.sq_bw, s.params.cell_radius_m);
    return set;
}

ConvexSubproblem build_subproblem(const Scenario& s, SchemeKind scheme,
                                  const DesignPoint& expansion, VariableLocks locks) {
    ConvexSubproblem sp;
    sp.set = build_surrogates(s, scheme, expansion);
    sp.power_total = s.params.total_power_mw;
    sp.h_lo = s.params.altitude_min_m * s.params.altitude_min_m;
    sp.h_hi = s.params.altitude_max_m * s.params.altitude_max_m;
    sp.theta_lo = s.params.beamwidth_min_rad * s.params.beamwidth_min_rad;
    sp.theta_hi = s.params.beamwidth_max_rad * s.params.beamwidth_max_rad;
    sp.locks = locks;
    // The experiments' fixed-(h,theta) baseline drops the coverage constraint;
    // with both coordinates frozen the cut would otherwise pin the barrier.
    sp.has_cut = !locks.altitude_beamwidth;
    return sp;
}

}  // namespace uvr
