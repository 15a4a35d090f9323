#include "uavrate/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

namespace uvr {

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Converged: return "converged";
        case SolveStatus::MaxIterations: return "max-iters";
        case SolveStatus::Numerical: return "numerical";
    }
    return "?";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// sign * (x[coord] - bound) > 0
struct LinConstraint {
    int coord;
    double sign;
    double bound;
};

// Affine map natural = T z + x0 over the scaled free coordinates. One tau and
// one p coordinate are eliminated against the simplex/power equalities; h and
// theta are scaled by their upper bounds.
struct Reduction {
    Eigen::MatrixXd T;
    Eigen::VectorXd x0;
    int nz = 0;

    Eigen::VectorXd natural(const Eigen::VectorXd& z) const { return T * z + x0; }
};

Reduction make_reduction(const ConvexSubproblem& sp, const Eigen::VectorXd& warm) {
    const VarLayout& ly = sp.set.ly;
    int nz = 0;
    if (!sp.locks.allocation) nz += (ly.n_tau - 1) + (ly.n_p - 1);
    if (!sp.locks.altitude_beamwidth) nz += 2;

    Reduction red;
    red.nz = nz;
    red.T = Eigen::MatrixXd::Zero(ly.size(), nz);
    red.x0 = Eigen::VectorXd::Zero(ly.size());

    int col = 0;
    if (!sp.locks.allocation) {
        for (int i = 0; i + 1 < ly.n_tau; ++i, ++col) {
            red.T(ly.tau(i), col) = 1.0;
            red.T(ly.tau(ly.n_tau - 1), col) = -1.0;
        }
        red.x0[ly.tau(ly.n_tau - 1)] = 1.0;
        const double P = sp.power_total;
        for (int i = 0; i + 1 < ly.n_p; ++i, ++col) {
            red.T(ly.p(i), col) = P;
            red.T(ly.p(ly.n_p - 1), col) = -P;
        }
        red.x0[ly.p(ly.n_p - 1)] = P;
    } else {
        for (int i = 0; i < ly.n_tau; ++i) red.x0[ly.tau(i)] = warm[ly.tau(i)];
        for (int i = 0; i < ly.n_p; ++i) red.x0[ly.p(i)] = warm[ly.p(i)];
    }
    if (!sp.locks.altitude_beamwidth) {
        red.T(ly.h(), col++) = sp.h_hi;
        red.T(ly.theta(), col++) = sp.theta_hi;
    } else {
        red.x0[ly.h()] = warm[ly.h()];
        red.x0[ly.theta()] = warm[ly.theta()];
    }
    return red;
}

Eigen::VectorXd to_z(const ConvexSubproblem& sp, const Eigen::VectorXd& x) {
    const VarLayout& ly = sp.set.ly;
    std::vector<double> vals;
    if (!sp.locks.allocation) {
        for (int i = 0; i + 1 < ly.n_tau; ++i) vals.push_back(x[ly.tau(i)]);
        for (int i = 0; i + 1 < ly.n_p; ++i) vals.push_back(x[ly.p(i)] / sp.power_total);
    }
    if (!sp.locks.altitude_beamwidth) {
        vals.push_back(x[ly.h()] / sp.h_hi);
        vals.push_back(x[ly.theta()] / sp.theta_hi);
    }
    return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<int>(vals.size()));
}

// The warm start must already satisfy the subproblem up to renormalization
// noise; anything grossly outside is a usage error, not something to repair.
void check_warm_start(const ConvexSubproblem& sp, const Eigen::VectorXd& warm) {
    const VarLayout& ly = sp.set.ly;
    double sum_tau = 0, sum_p = 0;
    for (int i = 0; i < ly.n_tau; ++i) {
        if (warm[ly.tau(i)] < -1e-9) throw std::invalid_argument("warm start: negative tau");
        sum_tau += warm[ly.tau(i)];
    }
    for (int i = 0; i < ly.n_p; ++i) {
        if (warm[ly.p(i)] < -1e-9 * sp.power_total)
            throw std::invalid_argument("warm start: negative power");
        sum_p += warm[ly.p(i)];
    }
    if (std::abs(sum_tau - 1.0) > 1e-6)
        throw std::invalid_argument("warm start: bandwidth fractions do not sum to 1");
    if (std::abs(sum_p - sp.power_total) > 1e-6 * sp.power_total)
        throw std::invalid_argument("warm start: powers do not sum to the budget");
    const double mh = 1e-6 * (sp.h_hi - sp.h_lo), mt = 1e-6 * (sp.theta_hi - sp.theta_lo);
    if (warm[ly.h()] < sp.h_lo - mh || warm[ly.h()] > sp.h_hi + mh)
        throw std::invalid_argument("warm start: altitude outside bounds");
    if (warm[ly.theta()] < sp.theta_lo - mt || warm[ly.theta()] > sp.theta_hi + mt)
        throw std::invalid_argument("warm start: beamwidth outside bounds");
    if (sp.has_cut && !sp.locks.altitude_beamwidth &&
        sp.set.cut.slack(warm[ly.h()], warm[ly.theta()]) <
            -1e-6 * std::max(1.0, sp.set.cut.radius))
        throw std::invalid_argument("warm start: violates the coverage cut");
}

// Strictly interior start: floors with headroom, strict box interior, and a
// positive coverage-cut slack reached by walking h toward the cut's
// max-slack altitude (the cut RHS is a downward parabola in sqrt(h)).
Eigen::VectorXd pull_interior(const ConvexSubproblem& sp, const SolverOptions& opts,
                              const Eigen::VectorXd& warm) {
    const VarLayout& ly = sp.set.ly;
    Eigen::VectorXd x = warm;

    if (!sp.locks.allocation) {
        double sum = 0;
        for (int i = 0; i < ly.n_tau; ++i) {
            x[ly.tau(i)] = std::max(x[ly.tau(i)], opts.tau_floor * 1.02);
            sum += x[ly.tau(i)];
        }
        for (int i = 0; i < ly.n_tau; ++i) x[ly.tau(i)] /= sum;

        const double pf = opts.p_floor_rel * sp.power_total;
        sum = 0;
        for (int i = 0; i < ly.n_p; ++i) {
            x[ly.p(i)] = std::max(x[ly.p(i)], pf * 1.02);
            sum += x[ly.p(i)];
        }
        for (int i = 0; i < ly.n_p; ++i) x[ly.p(i)] *= sp.power_total / sum;
    }

    if (!sp.locks.altitude_beamwidth) {
        const double mh = 1e-7 * (sp.h_hi - sp.h_lo);
        const double mt = 1e-7 * (sp.theta_hi - sp.theta_lo);
        x[ly.h()] = std::clamp(x[ly.h()], sp.h_lo + mh, sp.h_hi - mh);
        x[ly.theta()] = std::clamp(x[ly.theta()], sp.theta_lo + mt, sp.theta_hi - mt);

        if (sp.has_cut) {
            const CoverageCut& cut = sp.set.cut;
            const double eps = 1e-7 * std::max(1.0, cut.radius);
            for (int iter = 0; iter < 200 && cut.slack(x[ly.h()], x[ly.theta()]) < eps; ++iter) {
                const double h = x[ly.h()], th = x[ly.theta()];
                const double u_best = -cut.delta * std::sqrt(th) / (2.0 * cut.alpha);
                const double h_best = std::clamp(u_best * u_best, sp.h_lo + mh, sp.h_hi - mh);
                const double slope = cut.alpha + cut.delta * std::sqrt(th / h) / 2.0;
                const double need = eps - cut.slack(h, th);
                double step = (std::abs(slope) > 1e-300) ? need / slope : kInf;
                if (!std::isfinite(step) || (h_best - h) * step < 0)
                    step = (h_best - h);  // wrong side of the parabola: head to the apex
                const double h_new = std::clamp(h + step, sp.h_lo + mh, sp.h_hi - mh);
                if (std::abs(h_new - h) > 1e-12 * std::max(1.0, h)) {
                    x[ly.h()] = h_new;
                    continue;
                }
                const double th_new = std::min(th + 1e-3 * (sp.theta_hi - sp.theta_lo),
                                               sp.theta_hi - mt);
                if (th_new <= th)
                    throw std::invalid_argument(
                        "solve_subproblem: warm start cannot be pulled inside the coverage cut");
                x[ly.theta()] = th_new;
            }
            if (cut.slack(x[ly.h()], x[ly.theta()]) <= 0)
                throw std::invalid_argument(
                    "solve_subproblem: warm start infeasible for the coverage cut");
        }
    }
    return x;
}

class BarrierSolver {
public:
    BarrierSolver(const ConvexSubproblem& sp, const SolverOptions& opts,
                  const Eigen::VectorXd& start)
        : sp_(sp), opts_(opts), ly_(sp.set.ly), red_(make_reduction(sp, start)) {
        if (!sp.locks.allocation) {
            for (int i = 0; i < ly_.n_tau; ++i) lins_.push_back({ly_.tau(i), 1.0, opts.tau_floor});
            const double pf = opts.p_floor_rel * sp.power_total;
            for (int i = 0; i < ly_.n_p; ++i) lins_.push_back({ly_.p(i), 1.0, pf});
        }
        if (!sp.locks.altitude_beamwidth) {
            lins_.push_back({ly_.h(), 1.0, sp.h_lo});
            lins_.push_back({ly_.h(), -1.0, sp.h_hi});
            lins_.push_back({ly_.theta(), 1.0, sp.theta_lo});
            lins_.push_back({ly_.theta(), -1.0, sp.theta_hi});
        }
        use_cut_ = sp.has_cut && !sp.locks.altitude_beamwidth;
        n_con_ = static_cast<int>(sp.set.rates.size() + lins_.size()) + (use_cut_ ? 1 : 0);

        z_ = to_z(sp, start);
        t_ = 0.0;  // set by init_t
        init_t();
    }

    int num_constraints() const { return n_con_; }
    int newton_steps() const { return steps_; }
    double kkt_residual() const { return kkt_; }
    bool clean() const { return clean_; }

    Eigen::VectorXd natural() const { return red_.natural(z_); }
    double epigraph_t() const { return t_; }

    // One centering stage at fixed mu. Returns false on a numerical stall.
    bool center(double mu) {
        const int n = red_.nz + 1;
        Eigen::VectorXd g(n);
        Eigen::MatrixXd H(n, n);
        for (int it = 0; it < opts_.max_newton_steps; ++it) {
            if (!gradient_hessian(mu, g, H)) return false;
            Eigen::VectorXd step = solve_newton(H, g);
            const double lambda2 = std::max(0.0, g.dot(step));
            // Gradient norm in the Hessian metric; the meaningful stationarity
            // measure once barrier curvature reaches 1/mu scale.
            kkt_ = std::sqrt(lambda2);
            if (lambda2 / 2.0 <= opts_.newton_tol) return true;
            if (!line_search(mu, g, step)) return false;
            ++steps_;
        }
        clean_ = false;  // step budget exhausted at this stage
        return true;
    }

private:
    void init_t() {
        const Eigen::VectorXd x = natural();
        double mn = kInf;
        for (const auto& r : sp_.set.rates) mn = std::min(mn, r.value(x));
        t_ = mn - std::max(1e-6, 1e-3 * std::abs(mn));
    }

    // Slack vector: epigraph first, then linear bounds, then the cut.
    bool slacks(const Eigen::VectorXd& x, double t, std::vector<double>& s) const {
        s.clear();
        s.reserve(n_con_);
        bool ok = true;
        for (const auto& r : sp_.set.rates) {
            const double v = r.value(x) - t;
            s.push_back(v);
            ok = ok && v > 0;
        }
        for (const auto& lc : lins_) {
            const double v = lc.sign * (x[lc.coord] - lc.bound);
            s.push_back(v);
            ok = ok && v > 0;
        }
        if (use_cut_) {
            const double v = sp_.set.cut.slack(x[ly_.h()], x[ly_.theta()]);
            s.push_back(v);
            ok = ok && v > 0;
        }
        return ok;
    }

    double barrier_value(const Eigen::VectorXd& x, double t, double mu) const {
        std::vector<double> s;
        if (!slacks(x, t, s)) return -kInf;
        double f = t;
        for (double v : s) f += mu * std::log(v);
        return f;
    }

    bool gradient_hessian(double mu, Eigen::VectorXd& g, Eigen::MatrixXd& H) {
        const int nx = ly_.size();
        const Eigen::VectorXd x = natural();
        std::vector<double> s;
        if (!slacks(x, t_, s)) return false;

        Eigen::VectorXd g_nat = Eigen::VectorXd::Zero(nx);
        Eigen::MatrixXd h_nat = Eigen::MatrixXd::Zero(nx, nx);
        g.setZero();
        H.setZero();
        g[0] = 1.0;  // objective: maximize t

        Eigen::VectorXd grad_i(nx), w(red_.nz + 1);
        int idx = 0;
        for (const auto& r : sp_.set.rates) {
            const double si = s[idx++];
            grad_i.setZero();
            r.add_gradient(x, grad_i);
            g_nat += (mu / si) * grad_i;
            g[0] += -mu / si;
            tmp_.setZero(nx, nx);
            r.add_hessian(x, tmp_);
            h_nat += (mu / si) * tmp_;
            w[0] = -1.0;
            w.tail(red_.nz) = red_.T.transpose() * grad_i;
            H.noalias() -= (mu / (si * si)) * (w * w.transpose());
        }

        for (const auto& lc : lins_) {
            const double si = s[idx++];
            g_nat[lc.coord] += mu / si * lc.sign;
            w[0] = 0.0;
            w.tail(red_.nz) = red_.T.row(lc.coord).transpose() * lc.sign;
            H.noalias() -= (mu / (si * si)) * (w * w.transpose());
        }

        if (use_cut_) {
            const double si = s[idx++];
            const double h = x[ly_.h()], th = x[ly_.theta()];
            const CoverageCut& cut = sp_.set.cut;
            const double sq = std::sqrt(h * th);
            grad_i.setZero();
            grad_i[ly_.h()] = cut.alpha + 0.5 * cut.delta * std::sqrt(th / h);
            grad_i[ly_.theta()] = 0.5 * cut.delta * std::sqrt(h / th);
            g_nat += (mu / si) * grad_i;
            h_nat(ly_.h(), ly_.h()) += (mu / si) * (-0.25 * cut.delta * std::sqrt(th) / (h * std::sqrt(h)));
            h_nat(ly_.theta(), ly_.theta()) +=
                (mu / si) * (-0.25 * cut.delta * std::sqrt(h) / (th * std::sqrt(th)));
            const double cross = (mu / si) * (0.25 * cut.delta / sq);
            h_nat(ly_.h(), ly_.theta()) += cross;
            h_nat(ly_.theta(), ly_.h()) += cross;
            w[0] = 0.0;
            w.tail(red_.nz) = red_.T.transpose() * grad_i;
            H.noalias() -= (mu / (si * si)) * (w * w.transpose());
        }

        g.tail(red_.nz) = red_.T.transpose() * g_nat;
        H.bottomRightCorner(red_.nz, red_.nz) += red_.T.transpose() * h_nat * red_.T;
        return true;
    }

    Eigen::VectorXd solve_newton(const Eigen::MatrixXd& H, const Eigen::VectorXd& g) {
        Eigen::MatrixXd M = -H;
        const double scale = std::max(1.0, M.diagonal().cwiseAbs().maxCoeff());
        double ridge = 0.0;
        for (int attempt = 0; attempt < 30; ++attempt) {
            Eigen::MatrixXd Mr = M;
            if (ridge > 0) Mr.diagonal().array() += ridge;
            Eigen::LDLT<Eigen::MatrixXd> ldlt(Mr);
            if (ldlt.info() == Eigen::Success) {
                Eigen::VectorXd step = ldlt.solve(g);
                if (step.allFinite() && g.dot(step) > 0) return step;
            }
            ridge = (ridge == 0.0) ? 1e-12 * scale : ridge * 10.0;
        }
        clean_ = false;
        return g;  // gradient ascent fallback
    }

    bool line_search(double mu, const Eigen::VectorXd& g, const Eigen::VectorXd& step) {
        const double f0 = barrier_value(natural(), t_, mu);
        const double slope = g.dot(step);
        double alpha = 1.0;
        for (int i = 0; i < 60; ++i) {
            const double t_c = t_ + alpha * step[0];
            const Eigen::VectorXd z_c = z_ + alpha * step.tail(red_.nz);
            const double f_c = barrier_value(red_.natural(z_c), t_c, mu);
            if (f_c > -kInf && f_c >= f0 + 1e-4 * alpha * slope) {
                t_ = t_c;
                z_ = z_c;
                return true;
            }
            alpha *= 0.5;
        }
        return false;
    }

    const ConvexSubproblem& sp_;
    SolverOptions opts_;
    VarLayout ly_;
    Reduction red_;
    std::vector<LinConstraint> lins_;
    bool use_cut_ = true;
    int n_con_ = 0;

    Eigen::VectorXd z_;
    double t_ = 0.0;
    int steps_ = 0;
    double kkt_ = 0.0;
    bool clean_ = true;
    Eigen::MatrixXd tmp_;
};

DesignPoint renormalize(const ConvexSubproblem& sp, const Eigen::VectorXd& x) {
    DesignPoint v = unflatten(x, sp.set.ly);
    if (!sp.locks.allocation) {
        double st = 0, spw = 0;
        for (double t : v.tau) st += t;
        for (double pw : v.p) spw += pw;
        for (auto& t : v.tau) t /= st;
        for (auto& pw : v.p) pw *= sp.power_total / spw;
    }
    return v;
}

}  // namespace

SubproblemSolution solve_subproblem(const ConvexSubproblem& sp, const DesignPoint& warm_start,
                                    const SolverOptions& opts) {
    if (!(opts.barrier_decrease > 0 && opts.barrier_decrease < 1) || !(opts.barrier_weight > 0) ||
        !(opts.gap_target > 0) || !(opts.newton_tol > 0))
        throw std::invalid_argument("solve_subproblem: invalid solver options");

    const VarLayout& ly = sp.set.ly;
    const Eigen::VectorXd warm = flatten(warm_start, ly);
    check_warm_start(sp, warm);
    const double warm_obj = sp.set.min_rate(warm);

    SubproblemSolution sol;
    const Eigen::VectorXd start = pull_interior(sp, opts, warm);

    BarrierSolver bs(sp, opts, start);
    if (bs.num_constraints() == 0 || (sp.locks.allocation && sp.locks.altitude_beamwidth)) {
        sol.point = warm_start;
        sol.surrogate_objective = warm_obj;
        sol.epigraph_t = warm_obj;
        return sol;
    }

    bool stalled = false;
    double mu = opts.barrier_weight;
    const double m = static_cast<double>(bs.num_constraints());
    while (true) {
        if (!bs.center(mu)) {
            stalled = true;
            break;
        }
        if (m * mu <= opts.gap_target * (1 + 1e-12)) break;
        mu = std::max(mu * opts.barrier_decrease, opts.gap_target / m);
    }

    sol.point = renormalize(sp, bs.natural());
    sol.epigraph_t = bs.epigraph_t();
    sol.newton_steps = bs.newton_steps();
    sol.kkt_residual = bs.kkt_residual();
    sol.surrogate_objective = sp.set.min_rate(flatten(sol.point, ly));
    sol.status = stalled ? SolveStatus::Numerical
                         : (bs.clean() ? SolveStatus::Converged : SolveStatus::MaxIterations);

    // Ascent contract: never report a point below the warm start.
    if (!(sol.surrogate_objective >= warm_obj - 1e-12)) {
        sol.point = warm_start;
        sol.surrogate_objective = warm_obj;
        sol.epigraph_t = warm_obj;
    }
    return sol;
}

DesignPoint safeguard_step(const Scenario& s, SchemeKind scheme, const DesignPoint& v_old,
                           const DesignPoint& v_new) {
    const double f_old = objective(s, scheme, v_old).min_rate;
    if (objective(s, scheme, v_new).min_rate >= f_old - 1e-12) return v_new;

    double alpha = 0.5;
    for (int i = 0; i < 8; ++i, alpha *= 0.5) {
        DesignPoint v = v_old;
        for (std::size_t j = 0; j < v.tau.size(); ++j)
            v.tau[j] += alpha * (v_new.tau[j] - v_old.tau[j]);
        for (std::size_t j = 0; j < v.p.size(); ++j) v.p[j] += alpha * (v_new.p[j] - v_old.p[j]);
        v.sq_alt += alpha * (v_new.sq_alt - v_old.sq_alt);
        v.sq_bw += alpha * (v_new.sq_bw - v_old.sq_bw);
        if (objective(s, scheme, v).min_rate >= f_old - 1e-12) return v;
    }
    return v_old;
}

}  // namespace uvr
