// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sbnet/channel.hpp"
#include "sbnet/common.hpp"
#include "sbnet/convex_engine.hpp"
#include "sbnet/params.hpp"
#include "sbnet/problem.hpp"
#include "sbnet/rates.hpp"
#include "sbnet/relaxation.hpp"

namespace sbnet {

struct SolverConfig {
    int t1_max = 30;  // outer SCAM retightenings
    int t2_max = 50;  // CCCP rounds per inner loop
    int t3_max = 50;  // feasibility-search rounds
    double eps1 = 1e-4;  // bits/s/Hz, absolute objective change
    double eps2 = 1e-4;
    double eps3 = 1e-4;
    double eps_active = 1e-3;  // C1 activity check at convergence
    Tolerances tol;

    void validate() const {
        if (t1_max < 1 || t2_max < 1 || t3_max < 1) throw InvalidInput("iteration caps must be >= 1");
        if (!(eps1 > 0.0) || !(eps2 > 0.0) || !(eps3 > 0.0)) throw InvalidInput("tolerances must be > 0");
    }
};

enum class Termination { Converged, IterationCap, Infeasible };

inline const char* to_string(Termination t) {
    switch (t) {
        case Termination::Converged: return "Converged";
        case Termination::IterationCap: return "IterationCap";
        case Termination::Infeasible: return "Infeasible";
    }
    return "?";
}

struct IterRecord {
    int outer = 0;   // SCAM retightening index; -1 for phase-I rounds
    int inner = 0;
    double objective = 0.0;     // relaxed objective at the iterate
    double min_residual = 0.0;  // original-constraint residual at the iterate
};

struct SolverReport {
    Eigen::VectorXd final_x;   // log powers
    Eigen::VectorXd final_p;   // linear watts
    RateTriple final_rates;    // true (unrelaxed) rates, wrapper-level layout
    double objective = 0.0;    // true total spectral efficiency
    std::vector<IterRecord> trace;
    Eigen::VectorXd c1_activity;  // per coupling |Rbar^b - Rbar^s| at the end
    Termination termination = Termination::Infeasible;
    int outer_iterations = 0;
    int inner_iterations_total = 0;
    int engine_iterations_total = 0;
    double wall_time_s = 0.0;
    int zf_redraws = 0;
};

// Affine over-estimator of a concave function around an anchor point:
// value + grad^T (x - anchor).
struct AffineApprox {
    double value = 0.0;
    Eigen::VectorXd grad;
    Eigen::VectorXd anchor;

    double operator()(const Eigen::VectorXd& x) const { return value + grad.dot(x - anchor); }
};

// C1 in exact DC form: R^b_rel - R^s = R^b_rel - log2(omega D_s + a_s
// e^{x_s}) + log2(omega D_s). Both log terms are log-sum-exp, hence convex
// in the log powers: the subtracted one stays exact (it enters concavely)
// and the added one is replaced by its tangent, which under-estimates a
// convex function. The resulting concave constraint is a restriction of the
// original C1, so every CCCP iterate satisfies the true coupling.
inline AffineApprox taylor_linearize_su(const ProblemSpec& ps, int link_index,
                                        const Eigen::VectorXd& anchor) {
    AffineApprox a;
    a.anchor = anchor;
    a.value = link_log2_half(ps.links[link_index], anchor, ps.sinr_gap, false, &a.grad);
    return a;
}

namespace detail {

inline Eigen::VectorXd log_lower_bounds(const ProblemSpec& ps) {
    return Eigen::VectorXd::Constant(ps.num_vars, std::log(ps.p_min));
}

inline Eigen::VectorXd log_upper_bounds(const ProblemSpec& ps) {
    return ps.p_max.array().log().matrix();
}

// Shared constraint set F: power caps plus QoS floors (floors optionally
// slacked for phase-I, where slack_var >= 0 names the slack position).
inline void append_caps(const ProblemSpec& ps, std::vector<ConvexSubproblem::Fn>& out,
                        int nx) {
    for (const SumCap& cap : ps.caps) {
        out.push_back([&ps, cap, nx](const Eigen::VectorXd& y, Eigen::VectorXd* grad) {
            if (grad) grad->setZero(y.size());
            double total = 0.0;
            for (int j : cap.vars) {
                const double pj = std::exp(y(j));
                total += pj;
                if (grad) (*grad)(j) = -pj;
            }
            (void)nx;
            return cap.cap - total;
        });
    }
}

inline void append_floors(const ProblemSpec& ps, std::vector<ConvexSubproblem::Fn>& out,
                          int nx, int slack_var) {
    for (int i = 0; i < static_cast<int>(ps.links.size()); ++i) {
        if (!(ps.links[i].rate_floor > 0.0)) continue;
        out.push_back([&ps, i, nx, slack_var](const Eigen::VectorXd& y, Eigen::VectorXd* grad) {
            Eigen::VectorXd gx;
            const double r =
                floor_residual_nats(ps.links[i], y.head(nx), ps.sinr_gap, grad ? &gx : nullptr);
            if (grad) {
                grad->setZero(y.size());
                grad->head(nx) = gx;
                if (slack_var >= 0) (*grad)(slack_var) = -1.0;
            }
            return slack_var >= 0 ? r - y(slack_var) : r;
        });
    }
}

inline void append_c1(const ProblemSpec& ps, const RelaxationState& relax,
                      const std::vector<AffineApprox>& su_approx,
                      std::vector<ConvexSubproblem::Fn>& out, int nx, int slack_var) {
    for (int i = 0; i < static_cast<int>(ps.c1.size()); ++i) {
        const int bh = ps.c1[i].bh;
        const int su_idx = ps.c1[i].su;
        const AffineApprox& su = su_approx[i];
        out.push_back([&ps, &relax, &su, bh, su_idx, nx, slack_var](const Eigen::VectorXd& y,
                                                                    Eigen::VectorXd* grad) {
            Eigen::VectorXd gx, gd;
            const double rb = relaxed_rate(ps, relax, bh, y.head(nx), grad ? &gx : nullptr);
            const double num = link_log2_half(ps.links[su_idx], y.head(nx), ps.sinr_gap, true,
                                              grad ? &gd : nullptr);
            const double phi = rb - num + su(y.head(nx));
            if (grad) {
                grad->setZero(y.size());
                grad->head(nx) = gx - gd + su.grad;
                if (slack_var >= 0) (*grad)(slack_var) = -1.0;
            }
            return slack_var >= 0 ? phi - y(slack_var) : phi;
        });
    }
}

// Scales shared-budget powers down until every sum cap holds strictly, and
// clamps into the box. Used to regularize arbitrary phase-I starts.
inline Eigen::VectorXd project_into_caps(const ProblemSpec& ps, Eigen::VectorXd x) {
    const Eigen::VectorXd lb = log_lower_bounds(ps);
    const Eigen::VectorXd ub = log_upper_bounds(ps);
    for (int j = 0; j < ps.num_vars; ++j)
        x(j) = std::clamp(x(j), lb(j) + 1e-6, ub(j) - 1e-6);
    for (const SumCap& cap : ps.caps) {
        double total = 0.0;
        for (int j : cap.vars) total += std::exp(x(j));
        if (total >= 0.5 * cap.cap) {
            const double shift = std::log(0.5 * cap.cap / total);
            for (int j : cap.vars) x(j) = std::max(x(j) + shift, lb(j) + 1e-6);
        }
    }
    return x;
}

// Minimum relaxed-problem residual at x for the DCP with fixed relaxation:
// phi_n, floors and caps. Sign test only; units are mixed.
inline double dcp_min_residual(const ProblemSpec& ps, const RelaxationState& relax,
                               const Eigen::VectorXd& x) {
    double m = std::numeric_limits<double>::infinity();
    for (const CouplingPair& cp : ps.c1)
        m = std::min(m, relaxed_rate(ps, relax, cp.bh, x) -
                            link_rate(ps.links[cp.su], x, ps.sinr_gap));
    for (const SumCap& cap : ps.caps) {
        double total = 0.0;
        for (int j : cap.vars) total += std::exp(x(j));
        m = std::min(m, cap.cap - total);
    }
    for (const Link& l : ps.links)
        if (l.rate_floor > 0.0) m = std::min(m, floor_residual_nats(l, x, ps.sinr_gap));
    return m;
}

// Coordinate descent on the backhaul powers at a fixed access allocation.
// The objective never depends on a backhaul power directly, it only adds
// interference at the SUs, so the minimal p_bh satisfying C1 is optimal
// (the C1 activity of Lemma 2). Each coupling gives a quadratic in its own
// power: gain_b p * I_su(p) = gain_su e^{x_su} * D_b. Gauss-Seidel from a
// feasible point; reverted by the caller if anything degrades.
inline bool polish_c1_activity(const ProblemSpec& ps, Eigen::VectorXd& x) {
    if (ps.c1.empty()) return false;
    const Eigen::VectorXd lb = log_lower_bounds(ps);
    const Eigen::VectorXd ub = log_upper_bounds(ps);
    bool changed = false;
    for (int round = 0; round < 100; ++round) {
        double max_step = 0.0;
        for (const CouplingPair& cp : ps.c1) {
            const Link& bh = ps.links[cp.bh];
            const Link& su = ps.links[cp.su];
            if (bh.own < 0 || su.own < 0) continue;
            const double denom_b = link_denom(bh, x);
            const double s_num = su.gain * std::exp(x(su.own));
            // SU denominator split into the own-backhaul term and the rest
            const double c_own = su.denom(bh.own);
            double i_rest = su.denom_const;
            for (int j = 0; j < ps.num_vars; ++j)
                if (j != bh.own && su.denom(j) != 0.0) i_rest += su.denom(j) * std::exp(x(j));
            // gain_b c_own p^2 + gain_b i_rest p - s_num denom_b = 0
            const double a = bh.gain * c_own;
            const double b = bh.gain * i_rest;
            const double c = -s_num * denom_b;
            double p_eq;
            if (a > 0.0)
                p_eq = (-b + std::sqrt(b * b - 4.0 * a * c)) / (2.0 * a);
            else
                p_eq = -c / b;
            if (!(p_eq > 0.0) || !std::isfinite(p_eq)) continue;
            const double x_new =
                std::clamp(std::log(p_eq * (1.0 + 1e-9)), lb(bh.own), ub(bh.own));
            max_step = std::max(max_step, std::abs(x_new - x(bh.own)));
            if (x_new != x(bh.own)) changed = true;
            x(bh.own) = x_new;
        }
        if (max_step < 1e-12) break;
    }
    return changed;
}

}  // namespace detail

// Algorithm: CCCP inner loop. Starts from a point feasible for the DCP with
// the given fixed relaxation; every iterate stays inside the true feasible
// set and the relaxed objective is nondecreasing.
struct CccpResult {
    Eigen::VectorXd x;
    std::vector<IterRecord> trace;
    bool converged = false;
    int engine_iterations = 0;
};

inline CccpResult cccp_inner(const ProblemSpec& ps, const RelaxationState& relax,
                             const Eigen::VectorXd& start, const SolverConfig& cfg,
                             int outer_index = 0) {
    const int nx = ps.num_vars;
    if (detail::dcp_min_residual(ps, relax, start) < -cfg.tol.eps_feas)
        throw InfeasibleStart("cccp_inner start is infeasible for the DCP");

    CccpResult res;
    res.x = start;
    double best = relaxed_objective(ps, relax, start);
    res.trace.push_back({outer_index, 0, best, original_min_residual(ps, res.x)});

    for (int t = 0; t < cfg.t2_max; ++t) {
        std::vector<AffineApprox> su_approx;
        su_approx.reserve(ps.c1.size());
        for (const CouplingPair& cp : ps.c1)
            su_approx.push_back(taylor_linearize_su(ps, cp.su, res.x));

        ConvexSubproblem sub;
        sub.lb = detail::log_lower_bounds(ps);
        sub.ub = detail::log_upper_bounds(ps);
        sub.objective = [&ps, &relax](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
            return relaxed_objective(ps, relax, x, grad);
        };
        detail::append_c1(ps, relax, su_approx, sub.constraints, nx, -1);
        detail::append_caps(ps, sub.constraints, nx);
        detail::append_floors(ps, sub.constraints, nx, -1);

        KktReport rep = solve(sub, res.x, cfg.tol);
        res.engine_iterations += rep.iterations;

        // keep the incumbent on numerical regression; terminates the loop
        if (rep.objective_value < best - 1e-8) {
            res.converged = true;
            break;
        }
        res.x = rep.solution;
        const double obj = rep.objective_value;
        res.trace.push_back({outer_index, t + 1, obj, original_min_residual(ps, res.x)});
        const bool small_change = std::abs(obj - best) <= cfg.eps2;
        best = std::max(best, obj);
        if (small_change) {
            res.converged = true;
            break;
        }
    }
    return res;
}

// Algorithm: feasibility search. Maximizes the slack s over re-linearized C1
// and slacked QoS floors, with power caps enforced throughout. Success means
// s >= 0 with the whole constraint set holding at the returned point.
inline std::optional<Eigen::VectorXd> find_feasible_start(const ProblemSpec& ps,
                                                          const RelaxationState& relax,
                                                          const Eigen::VectorXd& arbitrary_start,
                                                          const SolverConfig& cfg,
                                                          std::vector<IterRecord>* trace = nullptr,
                                                          int* engine_iters = nullptr) {
    const int nx = ps.num_vars;
    Eigen::VectorXd x = detail::project_into_caps(ps, arbitrary_start);
    double prev_s = -std::numeric_limits<double>::infinity();
    // anchors are refreshed at every iterate, starting from the projected
    // start, so the feasibility tests below are against the original
    // constraints; the caller's relaxation only seeds the search
    RelaxationState cur = retighten(ps, x);
    (void)relax;

    for (int t = 0; t < cfg.t3_max; ++t) {
        if (detail::dcp_min_residual(ps, cur, x) >= 0.0) return x;

        std::vector<AffineApprox> su_approx;
        su_approx.reserve(ps.c1.size());
        for (const CouplingPair& cp : ps.c1)
            su_approx.push_back(taylor_linearize_su(ps, cp.su, x));

        ConvexSubproblem sub;
        sub.lb.resize(nx + 1);
        sub.ub.resize(nx + 1);
        sub.lb.head(nx) = detail::log_lower_bounds(ps);
        sub.ub.head(nx) = detail::log_upper_bounds(ps);
        sub.lb(nx) = -1e3;
        sub.ub(nx) = 1e3;
        sub.objective = [nx](const Eigen::VectorXd& y, Eigen::VectorXd* grad) {
            if (grad) {
                grad->setZero(y.size());
                (*grad)(nx) = 1.0;
            }
            return y(nx);
        };
        detail::append_c1(ps, cur, su_approx, sub.constraints, nx, nx);
        detail::append_caps(ps, sub.constraints, nx + 1);
        detail::append_floors(ps, sub.constraints, nx, nx);

        // strictly feasible slack start: sit below the worst residual
        double worst = std::numeric_limits<double>::infinity();
        Eigen::VectorXd y0(nx + 1);
        y0.head(nx) = x;
        y0(nx) = 0.0;
        for (const auto& c : sub.constraints) worst = std::min(worst, c(y0, nullptr));
        y0(nx) = std::min(worst, 0.0) - 1.0;

        auto [rep, s] = solve_feasibility(sub, y0, cfg.tol);
        if (engine_iters) *engine_iters += rep.iterations;
        x = rep.solution.head(nx);
        if (trace) trace->push_back({-1, t, s, original_min_residual(ps, x)});

        // re-anchoring makes the relaxed rates exact at the new iterate, so
        // the feasibility test below is against the original constraints
        cur = retighten(ps, x);
        if (detail::dcp_min_residual(ps, cur, x) >= 0.0) return x;
        if (std::abs(s - prev_s) <= cfg.eps3 && s < 0.0) break;
        prev_s = s;
    }
    return std::nullopt;
}

// Algorithm: overall SCAM loop over any assembled problem. Phase-I from a
// uniform half-budget split (or a caller-provided start in log powers), then
// alternate {CCCP inner loop, retighten}.
inline SolverReport solve_problem(const ProblemSpec& ps, const SolverConfig& cfg,
                                  const std::optional<Eigen::VectorXd>& start = std::nullopt) {
    cfg.validate();
    const auto t_start = std::chrono::steady_clock::now();
    SolverReport rep;

    // uniform split of 50% of each budget; per-variable caps for the rest
    Eigen::VectorXd x0(ps.num_vars);
    for (int j = 0; j < ps.num_vars; ++j) x0(j) = std::log(0.5 * ps.p_max(j));
    for (const SumCap& cap : ps.caps)
        for (int j : cap.vars)
            x0(j) = std::log(0.5 * cap.cap / static_cast<double>(cap.vars.size()));
    if (start) {
        if (start->size() != ps.num_vars) throw InvalidInput("start has the wrong dimension");
        x0 = *start;
    }

    RelaxationState relax = retighten(ps, x0);
    auto feasible = find_feasible_start(ps, relax, x0, cfg, &rep.trace,
                                        &rep.engine_iterations_total);
    // the slack search is local; retry from low-power starts, which favor
    // instances whose floors are interference-limited
    for (double frac : {1e-2, 1e-4}) {
        if (feasible || start) break;
        Eigen::VectorXd x_low = (frac * ps.p_max.array()).log().matrix();
        relax = retighten(ps, x_low);
        feasible = find_feasible_start(ps, relax, x_low, cfg, &rep.trace,
                                       &rep.engine_iterations_total);
    }
    if (!feasible) {
        rep.termination = Termination::Infeasible;
        rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
        return rep;
    }

    Eigen::VectorXd x = *feasible;
    relax = retighten(ps, x);  // anchors from the feasible start's SINRs
    double prev_true = problem_objective(ps, x);
    bool converged = false;

    for (int t = 0; t < cfg.t1_max; ++t) {
        // re-anchoring can push the incumbent just outside the new DCP's
        // feasible set (the C1 left side loses its relaxation slack); repair
        // with a short feasibility search from the incumbent
        if (detail::dcp_min_residual(ps, relax, x) < 0.0) {
            auto repaired = find_feasible_start(ps, relax, x, cfg, &rep.trace,
                                                &rep.engine_iterations_total);
            if (!repaired) break;
            x = *repaired;
            relax = retighten(ps, x);
            prev_true = problem_objective(ps, x);
        }
        CccpResult inner = cccp_inner(ps, relax, x, cfg, t);
        rep.engine_iterations_total += inner.engine_iterations;
        rep.inner_iterations_total += static_cast<int>(inner.trace.size()) - 1;
        rep.trace.insert(rep.trace.end(), inner.trace.begin(), inner.trace.end());
        x = inner.x;
        rep.outer_iterations = t + 1;

        relax = retighten(ps, x);  // Rbar == R at x after this
        const double true_obj = problem_objective(ps, x);
        if (std::abs(true_obj - prev_true) <= cfg.eps1) {
            converged = inner.converged;
            prev_true = true_obj;
            break;
        }
        prev_true = true_obj;
    }

    // trim backhaul powers to exact C1 activity; keep the trimmed point only
    // if it is still feasible and the objective did not regress
    {
        Eigen::VectorXd x_trim = x;
        if (detail::polish_c1_activity(ps, x_trim) &&
            original_min_residual(ps, x_trim) >= -cfg.tol.eps_feas &&
            problem_objective(ps, x_trim) >= prev_true - 1e-10) {
            x = x_trim;
            relax = retighten(ps, x);
            prev_true = problem_objective(ps, x);
        }
    }

    // the last inner round ran against anchors that are now stale; make sure
    // the reported point satisfies the original constraints
    if (original_min_residual(ps, x) < -cfg.tol.eps_feas) {
        auto repaired = find_feasible_start(ps, relax, x, cfg, &rep.trace,
                                            &rep.engine_iterations_total);
        if (repaired) {
            x = *repaired;
            relax = retighten(ps, x);
            prev_true = problem_objective(ps, x);
        } else {
            converged = false;
        }
    }

    rep.final_x = x;
    rep.final_p = x.array().exp().matrix();
    rep.objective = prev_true;
    rep.c1_activity.resize(ps.c1.size());
    for (int i = 0; i < static_cast<int>(ps.c1.size()); ++i) {
        auto [rb, rs] = dc_constraint(ps, relax, i, x);
        rep.c1_activity(i) = std::abs(rb - rs);
    }
    rep.termination = converged ? Termination::Converged : Termination::IterationCap;
    rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return rep;
}

// Wrapper over a channel realization: builds the downlink problem, solves it
// and reports the true rates in the [MU, backhaul, SU] layout.
inline SolverReport solve_overall(const ChannelRealization& ch, const FadingParams& params,
                                  const PowerLimits& limits, const SolverConfig& cfg) {
    const ProblemSpec ps = build_problem(ch.g, params, limits);
    SolverReport rep = solve_problem(ps, cfg);
    rep.zf_redraws = ch.zf_redraws;
    if (rep.termination != Termination::Infeasible) {
        const PowerVector p = PowerVector::from_log_flat(rep.final_x, ch.K, ch.N);
        rep.final_rates = objective(p, ch.g, params);
        rep.objective = rep.final_rates.total;
    }
    return rep;
}

}  // namespace sbnet
