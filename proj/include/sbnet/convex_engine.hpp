// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sbnet/common.hpp"

namespace sbnet {

// Concave maximization over a box:
//   max f(x)  s.t.  g_i(x) >= 0,  lb <= x <= ub
// f and every g_i concave. Callables return the value and fill the gradient
// when the pointer is non-null.
struct ConvexSubproblem {
    using Fn = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)>;
    Fn objective;
    std::vector<Fn> constraints;
    Eigen::VectorXd lb, ub;
};

struct Tolerances {
    double eps_feas = 1e-8;
    double eps_kkt = 1e-6;
    double barrier_gap = 1e-8;  // stop when m/t < barrier_gap
    int max_inner = 200;        // Newton iterations per barrier stage
    int max_stages = 12;
};

struct KktReport {
    Eigen::VectorXd solution;
    double objective_value = 0.0;
    double max_primal_residual = std::numeric_limits<double>::infinity();
    double stationarity_residual = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
};

namespace detail {

// Barrier value/gradient at parameter t. Returns false when x is outside the
// strict interior or anything is non-finite.
inline bool barrier_eval(const ConvexSubproblem& sub, const Eigen::VectorXd& x, double t,
                         double* value, Eigen::VectorXd* grad) {
    const int n = static_cast<int>(x.size());
    for (int j = 0; j < n; ++j)
        if (!(x(j) > sub.lb(j)) || !(x(j) < sub.ub(j))) return false;

    Eigen::VectorXd gobj;
    const double f = sub.objective(x, grad ? &gobj : nullptr);
    if (!std::isfinite(f)) return false;
    double b = t * f;
    if (grad) *grad = t * gobj;

    Eigen::VectorXd gc;
    for (const auto& c : sub.constraints) {
        const double gi = c(x, grad ? &gc : nullptr);
        if (!(gi > 0.0) || !std::isfinite(gi)) return false;
        b += std::log(gi);
        if (grad) *grad += gc / gi;
    }
    for (int j = 0; j < n; ++j) {
        b += std::log(x(j) - sub.lb(j)) + std::log(sub.ub(j) - x(j));
        if (grad) (*grad)(j) += 1.0 / (x(j) - sub.lb(j)) - 1.0 / (sub.ub(j) - x(j));
    }
    if (!std::isfinite(b)) return false;
    if (value) *value = b;
    return true;
}

inline double min_constraint_residual(const ConvexSubproblem& sub, const Eigen::VectorXd& x) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& c : sub.constraints) m = std::min(m, c(x, nullptr));
    for (int j = 0; j < x.size(); ++j)
        m = std::min({m, x(j) - sub.lb(j), sub.ub(j) - x(j)});
    return m;
}

// Pushes a boundary start into the strict interior by following the gradients
// of the violated/active constraints. Fails with InfeasibleStart.
inline Eigen::VectorXd interior_nudge(const ConvexSubproblem& sub, Eigen::VectorXd x,
                                      double eps_feas) {
    const int n = static_cast<int>(x.size());
    // clip into the open box first
    for (int j = 0; j < n; ++j) {
        const double margin = 1e-9 * std::max(1.0, sub.ub(j) - sub.lb(j));
        x(j) = std::clamp(x(j), sub.lb(j) + margin, sub.ub(j) - margin);
    }
    double step = 1e-8;
    for (int attempt = 0; attempt < 60; ++attempt) {
        bool ok = true;
        Eigen::VectorXd push = Eigen::VectorXd::Zero(n);
        Eigen::VectorXd gc(n);
        double worst = std::numeric_limits<double>::infinity();
        for (const auto& c : sub.constraints) {
            const double gi = c(x, &gc);
            worst = std::min(worst, gi);
            if (!(gi > 1e-12)) {
                if (gi < -eps_feas) throw InfeasibleStart("start violates a constraint");
                ok = false;
                const double nrm = gc.norm();
                if (nrm > 0.0) push += gc / nrm;
            }
        }
        if (ok) return x;
        Eigen::VectorXd cand = x + step * push;
        for (int j = 0; j < n; ++j) {
            const double margin = 1e-9 * std::max(1.0, sub.ub(j) - sub.lb(j));
            cand(j) = std::clamp(cand(j), sub.lb(j) + margin, sub.ub(j) - margin);
        }
        if (min_constraint_residual(sub, cand) > worst) x = cand;
        step *= 4.0;
    }
    throw InfeasibleStart("could not reach the strict interior from the given start");
}

}  // namespace detail

inline KktReport solve(const ConvexSubproblem& sub, const Eigen::VectorXd& start,
                       const Tolerances& tol = {},
                       const std::function<bool(const Eigen::VectorXd&)>& stop_early = {}) {
    const int n = static_cast<int>(start.size());
    const double m = static_cast<double>(sub.constraints.size() + 2 * n);

    Eigen::VectorXd x = detail::interior_nudge(sub, start, tol.eps_feas);
    const double f_start = sub.objective(x, nullptr);

    double t = 1.0;
    int total_iters = 0;
    double bval;
    Eigen::VectorXd bgrad(n);

    for (int stage = 0; stage < tol.max_stages; ++stage) {
        if (!detail::barrier_eval(sub, x, t, &bval, &bgrad))
            throw NumericalBreakdown("barrier not finite at stage start");

        // constraint values/gradients at the current iterate are reused by the
        // Hessian assembly below
        const int nc = static_cast<int>(sub.constraints.size());
        std::vector<double> gval(nc);
        std::vector<Eigen::VectorXd> ggrad(nc, Eigen::VectorXd(n));

        // Smooth part of the barrier gradient with the constraint denominators
        // frozen at the current iterate: q(y) = t*grad f(y) + sum_i grad g_i(y)
        // / g_i(x). Its Jacobian is t*hess f + sum_i hess g_i / g_i(x), i.e. the
        // barrier Hessian minus the singular rank-one and box terms, and unlike
        // the full barrier it is finite-differencable across the boundary.
        auto smooth_grad = [&](const Eigen::VectorXd& y, Eigen::VectorXd& out) -> bool {
            Eigen::VectorXd g(n);
            const double f = sub.objective(y, &g);
            if (!std::isfinite(f) || !g.allFinite()) return false;
            out = t * g;
            for (int i = 0; i < nc; ++i) {
                const double gi = sub.constraints[i](y, &g);
                if (!std::isfinite(gi) || !g.allFinite()) return false;
                out += g / gval[i];
            }
            return true;
        };

        for (int it = 0; it < tol.max_inner; ++it) {
            ++total_iters;
            for (int i = 0; i < nc; ++i) {
                gval[i] = sub.constraints[i](x, &ggrad[i]);
                if (!(gval[i] > 0.0)) throw NumericalBreakdown("iterate left the interior");
            }

            // central finite differences of the smooth part, column by column
            Eigen::MatrixXd hess(n, n);
            Eigen::VectorXd qp(n), qm(n);
            for (int j = 0; j < n; ++j) {
                const double h = 1e-5 * (1.0 + std::abs(x(j)));
                Eigen::VectorXd xp = x, xm = x;
                xp(j) += h;
                xm(j) -= h;
                if (smooth_grad(xp, qp) && smooth_grad(xm, qm)) {
                    hess.col(j) = (qp - qm) / (2.0 * h);
                } else if (smooth_grad(xp, qp)) {
                    smooth_grad(x, qm);
                    hess.col(j) = (qp - qm) / h;
                } else if (smooth_grad(xm, qm)) {
                    smooth_grad(x, qp);
                    hess.col(j) = (qp - qm) / h;
                } else {
                    hess.col(j).setZero();
                    hess(j, j) = -1e12 * (1.0 + std::abs(bgrad(j)));
                }
            }
            hess = 0.5 * (hess + hess.transpose().eval());
            for (int i = 0; i < nc; ++i)
                hess.noalias() -= (ggrad[i] * ggrad[i].transpose()) / (gval[i] * gval[i]);
            for (int j = 0; j < n; ++j) {
                const double dl = x(j) - sub.lb(j), du = sub.ub(j) - x(j);
                hess(j, j) -= 1.0 / (dl * dl) + 1.0 / (du * du);
            }
            Eigen::MatrixXd a = -hess;  // should be PD

            // Newton direction with ridge fallback
            Eigen::VectorXd dir;
            double ridge = 0.0;
            for (int tries = 0;; ++tries) {
                Eigen::LDLT<Eigen::MatrixXd> ldlt(
                    a + ridge * Eigen::MatrixXd::Identity(n, n));
                dir = ldlt.solve(bgrad);
                if (ldlt.info() == Eigen::Success && dir.dot(bgrad) > 0.0 &&
                    dir.allFinite())
                    break;
                if (tries >= 8) {
                    dir = bgrad;  // gradient fallback
                    break;
                }
                ridge = (ridge == 0.0) ? 1e-10 * (1.0 + a.trace() / n) : ridge * 100.0;
            }

            if (bgrad.lpNorm<Eigen::Infinity>() / t <= 0.05 * tol.eps_kkt) break;
            const double decrement = dir.dot(bgrad);
            if (decrement / t <= 1e-18 * (1.0 + std::abs(bval) / t)) break;

            // backtracking line search: stay in the strict interior, then Armijo.
            // Near the stage optimum at large t the barrier value saturates in
            // double precision, so the full Newton step is also accepted on a
            // plain gradient-norm decrease.
            double s = 1.0;
            double bnew;
            bool accepted = false;
            Eigen::VectorXd gcand(n);
            for (int ls = 0; ls < 60; ++ls) {
                Eigen::VectorXd cand = x + s * dir;
                if (detail::barrier_eval(sub, cand, t, &bnew, ls == 0 ? &gcand : nullptr) &&
                    (bnew >= bval + 0.01 * s * decrement ||
                     (ls == 0 &&
                      gcand.lpNorm<Eigen::Infinity>() <=
                          0.9 * bgrad.lpNorm<Eigen::Infinity>()))) {
                    x = std::move(cand);
                    accepted = true;
                    break;
                }
                s *= 0.5;
            }
            if (!accepted) break;
            if (!detail::barrier_eval(sub, x, t, &bval, &bgrad))
                throw NumericalBreakdown("barrier not finite after step");
        }

        if (stop_early && stop_early(x)) break;
        if (m / t < tol.barrier_gap) break;
        t *= 10.0;
    }

    KktReport rep;
    rep.solution = x;
    rep.objective_value = sub.objective(x, nullptr);
    rep.iterations = total_iters;
    rep.max_primal_residual = std::max(0.0, -detail::min_constraint_residual(sub, x));
    if (detail::barrier_eval(sub, x, t, &bval, &bgrad))
        rep.stationarity_residual = bgrad.lpNorm<Eigen::Infinity>() / t;
    const bool gap_closed = (m / t < tol.barrier_gap) || (stop_early && stop_early(x));
    rep.converged = gap_closed && rep.max_primal_residual <= tol.eps_feas &&
                    rep.stationarity_residual <= tol.eps_kkt;

    // the subproblem optimum can never be below a feasible start; keep the
    // start if barrier rounding left us marginally under it
    if (rep.objective_value + 1e-12 < f_start) {
        rep.solution = detail::interior_nudge(sub, start, tol.eps_feas);
        rep.objective_value = sub.objective(rep.solution, nullptr);
        rep.max_primal_residual =
            std::max(0.0, -detail::min_constraint_residual(sub, rep.solution));
    }
    return rep;
}

// Slack maximization wrapper: the subproblem's objective is the slack s and
// iteration may stop as soon as the slack is safely positive.
inline std::pair<KktReport, double> solve_feasibility(const ConvexSubproblem& sub,
                                                      const Eigen::VectorXd& start,
                                                      const Tolerances& tol = {}) {
    auto early = [&sub](const Eigen::VectorXd& x) { return sub.objective(x, nullptr) > 1e-6; };
    KktReport rep = solve(sub, start, tol, early);
    return {rep, rep.objective_value};
}

}  // namespace sbnet
