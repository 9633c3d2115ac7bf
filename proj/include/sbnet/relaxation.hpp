// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <utility>

#include <Eigen/Dense>

#include "sbnet/common.hpp"
#include "sbnet/problem.hpp"

namespace sbnet {

// Anchors below this are clamped; alpha -> 0 would freeze a link out of the
// objective entirely.
inline constexpr double kAnchorFloor = 1e-9;

// Concave lower bound alpha*log2(z) + mu <= log2(1+z), tight at z0.
inline std::pair<double, double> scam_constants(double z0) {
    if (!(z0 > 0.0) || !std::isfinite(z0)) throw InvalidInput("anchor z0 must be > 0");
    const double alpha = z0 / (1.0 + z0);
    const double mu = std::log2(1.0 + z0) - alpha * std::log2(z0);
    return {alpha, mu};
}

// Per-link bound constants, aligned with ProblemSpec::links. Immutable value;
// retighten() produces a new state.
struct RelaxationState {
    Eigen::VectorXd alpha;
    Eigen::VectorXd mu;
    Eigen::VectorXd anchor_z;

    static RelaxationState at_anchors(const Eigen::VectorXd& z0) {
        RelaxationState s;
        const auto n = z0.size();
        s.alpha.resize(n);
        s.mu.resize(n);
        s.anchor_z.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double z = std::max(z0(i), kAnchorFloor);
            auto [a, m] = scam_constants(z);
            s.alpha(i) = a;
            s.mu(i) = m;
            s.anchor_z(i) = z;
        }
        return s;
    }
};

// Relaxed rate of link i in bits/s/Hz:
//   alpha * (log2 num(x) - log2 D(x) - log2 omega) + mu
// Concave in the log-power variables; fills grad when non-null.
inline double relaxed_rate(const ProblemSpec& ps, const RelaxationState& relax, int i,
                           const Eigen::VectorXd& x_log, Eigen::VectorXd* grad = nullptr) {
    const Link& l = ps.links[i];
    const double alpha = relax.alpha(i);
    double d = l.denom_const;
    Eigen::VectorXd terms;
    if (grad) {
        grad->setZero(x_log.size());
        terms = Eigen::VectorXd::Zero(x_log.size());
    }
    for (int j = 0; j < x_log.size(); ++j)
        if (l.denom(j) != 0.0) {
            const double tj = l.denom(j) * std::exp(x_log(j));
            d += tj;
            if (grad) terms(j) = tj;
        }
    double log2num = std::log2(l.gain);
    if (l.own >= 0) log2num += x_log(l.own) / kLn2;
    const double r = alpha * (log2num - std::log2(d) - std::log2(ps.sinr_gap)) + relax.mu(i);
    if (grad) {
        for (int j = 0; j < x_log.size(); ++j)
            if (terms(j) != 0.0) (*grad)(j) = -alpha * terms(j) / (kLn2 * d);
        if (l.own >= 0) (*grad)(l.own) += alpha / kLn2;
    }
    return r;
}

// Weighted sum of the relaxed user rates (backhaul links carry weight 0).
inline double relaxed_objective(const ProblemSpec& ps, const RelaxationState& relax,
                                const Eigen::VectorXd& x_log, Eigen::VectorXd* grad = nullptr) {
    double total = 0.0;
    if (grad) grad->setZero(x_log.size());
    Eigen::VectorXd gi;
    for (int i = 0; i < static_cast<int>(ps.links.size()); ++i) {
        const double w = ps.links[i].weight;
        if (w == 0.0) continue;
        total += w * relaxed_rate(ps, relax, i, x_log, grad ? &gi : nullptr);
        if (grad) *grad += w * gi;
    }
    return total;
}

// Both concave halves of the DC constraint phi_n = Rbar^b - Rbar^s, so the
// CCCP can linearize only the subtracted part.
inline std::pair<double, double> dc_constraint(const ProblemSpec& ps, const RelaxationState& relax,
                                               int pair_index, const Eigen::VectorXd& x_log) {
    const CouplingPair& cp = ps.c1[pair_index];
    return {relaxed_rate(ps, relax, cp.bh, x_log), relaxed_rate(ps, relax, cp.su, x_log)};
}

// New anchors at the current SINRs; the bound becomes tight at x_log.
inline RelaxationState retighten(const ProblemSpec& ps, const Eigen::VectorXd& x_log) {
    Eigen::VectorXd z(ps.links.size());
    for (int i = 0; i < static_cast<int>(ps.links.size()); ++i)
        z(i) = link_sinr(ps.links[i], x_log) / ps.sinr_gap;
    return RelaxationState::at_anchors(z);
}

}  // namespace sbnet
