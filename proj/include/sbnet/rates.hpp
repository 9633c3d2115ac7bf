// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "sbnet/channel.hpp"
#include "sbnet/common.hpp"
#include "sbnet/params.hpp"

namespace sbnet {

// xi^m_k = P^m_k a_mu[k] / (sum_n P^s_n c_sbs_mu[n][k] + sigma^2)
inline double sinr_mu(int k, const PowerVector& p, const EffectiveGains& g,
                      const FadingParams& params) {
    double denom = params.noise_power;
    for (int n = 0; n < p.N(); ++n) denom += p.p_sbs(n) * g.c_sbs_mu(n, k);
    return p.p_mu(k) * g.a_mu(k) / denom;
}

// xi^b_n, with residual self-interference gamma * P^s_n in the denominator
inline double sinr_bh(int n, const PowerVector& p, const EffectiveGains& g,
                      const FadingParams& params) {
    double denom = params.noise_power + params.gamma_si * p.p_sbs(n);
    for (int np = 0; np < p.N(); ++np)
        if (np != n) denom += p.p_sbs(np) * g.c_sbs_sbs(np, n);
    return p.p_bh(n) * g.a_bh(n) / denom;
}

// xi^s_n; inter-tier interference gathers every MBS stream (MU and backhaul)
inline double sinr_su(int n, const PowerVector& p, const EffectiveGains& g,
                      const FadingParams& params) {
    double denom = params.noise_power;
    for (int k = 0; k < p.K(); ++k) denom += p.p_mu(k) * g.c_mbs_su_mu(k, n);
    for (int np = 0; np < p.N(); ++np) {
        denom += p.p_bh(np) * g.c_mbs_su_bh(np, n);
        if (np != n) denom += p.p_sbs(np) * g.c_sbs_su(np, n);
    }
    return p.p_sbs(n) * g.a_su(n) / denom;
}

// R = log2(1 + sinr / omega)
inline double rate(double sinr, const FadingParams& params) {
    return std::log2(1.0 + sinr / params.sinr_gap);
}

inline RateTriple objective(const PowerVector& p, const EffectiveGains& g,
                            const FadingParams& params) {
    RateTriple r;
    r.r_mu.resize(p.K());
    r.r_bh.resize(p.N());
    r.r_su.resize(p.N());
    for (int k = 0; k < p.K(); ++k) r.r_mu(k) = rate(sinr_mu(k, p, g, params), params);
    for (int n = 0; n < p.N(); ++n) {
        r.r_bh(n) = rate(sinr_bh(n, p, g, params), params);
        r.r_su(n) = rate(sinr_su(n, p, g, params), params);
    }
    r.total = r.r_mu.sum() + r.r_su.sum();
    return r;
}

// Signed residuals of the original constraint set; >= 0 means satisfied.
struct ConstraintReport {
    Eigen::VectorXd c1;  // N:  R^b_n - R^s_n
    double c2 = 0.0;     //     P^m_max - sum P^m - sum P^b
    Eigen::VectorXd c3;  // N:  P^s_max - P^s_n
    Eigen::VectorXd c4;  // K:  R^m_k - R_min
    Eigen::VectorXd c5;  // N:  R^s_n - R_min_su
    bool feasible = false;

    double min_residual() const {
        double m = c2;
        for (int i = 0; i < c1.size(); ++i) m = std::min(m, c1(i));
        for (int i = 0; i < c3.size(); ++i) m = std::min(m, c3(i));
        for (int i = 0; i < c4.size(); ++i) m = std::min(m, c4(i));
        for (int i = 0; i < c5.size(); ++i) m = std::min(m, c5(i));
        return m;
    }
};

inline ConstraintReport check_constraints(const PowerVector& p, const EffectiveGains& g,
                                          const FadingParams& params, const PowerLimits& limits,
                                          double eps_feas = 1e-8) {
    const RateTriple r = objective(p, g, params);
    ConstraintReport rep;
    rep.c1 = r.r_bh - r.r_su;
    rep.c2 = limits.p_mbs_max_w - p.p_mu.sum() - p.p_bh.sum();
    rep.c3 = (limits.p_sbs_max_w - p.p_sbs.array()).matrix();
    rep.c4 = (r.r_mu.array() - limits.r_min_mu).matrix();
    rep.c5 = (r.r_su.array() - limits.r_min_su).matrix();
    rep.feasible = rep.min_residual() >= -eps_feas;
    return rep;
}

}  // namespace sbnet
