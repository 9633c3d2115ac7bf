// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "sbnet/channel.hpp"
#include "sbnet/common.hpp"
#include "sbnet/params.hpp"

namespace sbnet {

// One SINR link: numerator gain * P_own over an affine interference
// denominator in the (linear-watts) power variables.
struct Link {
    int own = -1;             // variable index of the numerator power; -1 = fixed power
    double gain = 0.0;        // effective numerator gain (includes fixed power when own < 0)
    Eigen::VectorXd denom;    // interference coefficients per variable
    double denom_const = 0.0; // noise plus fixed interference, watts
    double weight = 0.0;      // contribution to the spectral-efficiency objective
    double rate_floor = 0.0;  // QoS floor in bits/s/Hz; <= 0 means none
};

// C1 coupling: rate(links[bh]) >= rate(links[su])
struct CouplingPair {
    int bh = -1;
    int su = -1;
};

// Shared power budget: sum of the listed variables <= cap
struct SumCap {
    std::vector<int> vars;
    double cap = 0.0;
};

struct ProblemSpec {
    int num_vars = 0;
    std::vector<Link> links;
    std::vector<CouplingPair> c1;
    std::vector<SumCap> caps;
    Eigen::VectorXd p_max;  // per-variable power cap, watts
    double p_min = kPowerFloorW;  // lower box bound, watts
    double sinr_gap = 1.0;
};

// Denominator D(x) = sum_j c_j e^{x_j} + d0 evaluated in the log domain.
inline double link_denom(const Link& l, const Eigen::VectorXd& x_log) {
    double d = l.denom_const;
    for (int j = 0; j < x_log.size(); ++j)
        if (l.denom(j) != 0.0) d += l.denom(j) * std::exp(x_log(j));
    return d;
}

inline double link_sinr(const Link& l, const Eigen::VectorXd& x_log) {
    const double num = l.gain * (l.own >= 0 ? std::exp(x_log(l.own)) : 1.0);
    return num / link_denom(l, x_log);
}

inline double link_rate(const Link& l, const Eigen::VectorXd& x_log, double sinr_gap) {
    return std::log2(1.0 + link_sinr(l, x_log) / sinr_gap);
}

inline double problem_objective(const ProblemSpec& ps, const Eigen::VectorXd& x_log) {
    double total = 0.0;
    for (const Link& l : ps.links)
        if (l.weight != 0.0) total += l.weight * link_rate(l, x_log, ps.sinr_gap);
    return total;
}

// QoS floor in concave form (nats): x_own + ln(gain) - ln(tau*omega) - ln(D(x)) >= 0
// is exactly rate >= floor. Returns the residual; fills grad if non-null.
inline double floor_residual_nats(const Link& l, const Eigen::VectorXd& x_log, double sinr_gap,
                                  Eigen::VectorXd* grad = nullptr) {
    const double tau = std::exp2(l.rate_floor) - 1.0;
    if (grad) grad->setZero(x_log.size());
    if (tau <= 0.0) return 1.0;  // trivially satisfied
    double d = l.denom_const;
    Eigen::VectorXd terms = Eigen::VectorXd::Zero(x_log.size());
    for (int j = 0; j < x_log.size(); ++j)
        if (l.denom(j) != 0.0) {
            terms(j) = l.denom(j) * std::exp(x_log(j));
            d += terms(j);
        }
    double res = std::log(l.gain) - std::log(tau * sinr_gap) - std::log(d);
    if (l.own >= 0) res += x_log(l.own);
    if (grad) {
        for (int j = 0; j < x_log.size(); ++j)
            if (terms(j) != 0.0) (*grad)(j) = -terms(j) / d;
        if (l.own >= 0) (*grad)(l.own) += 1.0;
    }
    return res;
}

// Exact DC split of a link rate:
//   rate = log2(omega*D(x) + gain*e^{x_own}) - log2(omega*D(x)).
// Both halves are log-sum-exp, hence convex in the log powers. Returns the
// chosen half in bits; fills grad if non-null.
inline double link_log2_half(const Link& l, const Eigen::VectorXd& x_log, double sinr_gap,
                             bool with_own, Eigen::VectorXd* grad = nullptr) {
    double s = sinr_gap * l.denom_const;
    Eigen::VectorXd terms = Eigen::VectorXd::Zero(x_log.size());
    for (int j = 0; j < x_log.size(); ++j)
        if (l.denom(j) != 0.0) {
            terms(j) = sinr_gap * l.denom(j) * std::exp(x_log(j));
            s += terms(j);
        }
    if (with_own && l.own >= 0) {
        terms(l.own) += l.gain * std::exp(x_log(l.own));
        s += l.gain * std::exp(x_log(l.own));
    } else if (with_own) {
        s += l.gain;
    }
    if (grad) {
        grad->setZero(x_log.size());
        for (int j = 0; j < x_log.size(); ++j)
            if (terms(j) != 0.0) (*grad)(j) = terms(j) / (s * kLn2);
    }
    return std::log2(s);
}

// Signed minimum residual of the original constraint set (rates in
// bits/s/Hz, powers in watts); >= 0 means feasible.
inline double original_min_residual(const ProblemSpec& ps, const Eigen::VectorXd& x_log) {
    double m = std::numeric_limits<double>::infinity();
    for (const CouplingPair& cp : ps.c1)
        m = std::min(m, link_rate(ps.links[cp.bh], x_log, ps.sinr_gap) -
                            link_rate(ps.links[cp.su], x_log, ps.sinr_gap));
    for (const SumCap& cap : ps.caps) {
        double total = 0.0;
        for (int j : cap.vars) total += std::exp(x_log(j));
        m = std::min(m, cap.cap - total);
    }
    for (int j = 0; j < ps.num_vars; ++j) m = std::min(m, ps.p_max(j) - std::exp(x_log(j)));
    for (const Link& l : ps.links)
        if (l.rate_floor > 0.0)
            m = std::min(m, link_rate(l, x_log, ps.sinr_gap) - l.rate_floor);
    return m;
}

// Variable layout of the full problem: [p_mu(K), p_bh(N), p_sbs(N)].
inline int var_mu(int k) { return k; }
inline int var_bh(int K, int n) { return K + n; }
inline int var_sbs(int K, int N, int n) { return K + N + n; }

// Assembles the full downlink allocation problem from a channel realization.
inline ProblemSpec build_problem(const EffectiveGains& g, const FadingParams& params,
                                 const PowerLimits& limits, double su_weight = 1.0) {
    const int K = static_cast<int>(g.a_mu.size());
    const int N = static_cast<int>(g.a_bh.size());
    ProblemSpec ps;
    ps.num_vars = K + 2 * N;
    ps.sinr_gap = params.sinr_gap;
    ps.links.reserve(K + 2 * N);

    for (int k = 0; k < K; ++k) {
        Link l;
        l.own = var_mu(k);
        l.gain = g.a_mu(k);
        l.denom = Eigen::VectorXd::Zero(ps.num_vars);
        for (int n = 0; n < N; ++n) l.denom(var_sbs(K, N, n)) = g.c_sbs_mu(n, k);
        l.denom_const = params.noise_power;
        l.weight = 1.0;
        l.rate_floor = limits.r_min_mu;
        ps.links.push_back(std::move(l));
    }
    for (int n = 0; n < N; ++n) {
        Link l;
        l.own = var_bh(K, n);
        l.gain = g.a_bh(n);
        l.denom = Eigen::VectorXd::Zero(ps.num_vars);
        for (int np = 0; np < N; ++np)
            if (np != n) l.denom(var_sbs(K, N, np)) = g.c_sbs_sbs(np, n);
        l.denom(var_sbs(K, N, n)) = params.gamma_si;  // residual self-interference
        l.denom_const = params.noise_power;
        l.weight = 0.0;  // backhaul rates couple capacity, they are not summed
        l.rate_floor = 0.0;
        ps.links.push_back(std::move(l));
    }
    for (int n = 0; n < N; ++n) {
        Link l;
        l.own = var_sbs(K, N, n);
        l.gain = g.a_su(n);
        l.denom = Eigen::VectorXd::Zero(ps.num_vars);
        for (int k = 0; k < K; ++k) l.denom(var_mu(k)) = g.c_mbs_su_mu(k, n);
        for (int np = 0; np < N; ++np) {
            l.denom(var_bh(K, np)) = g.c_mbs_su_bh(np, n);
            if (np != n) l.denom(var_sbs(K, N, np)) = g.c_sbs_su(np, n);
        }
        l.denom_const = params.noise_power;
        l.weight = su_weight;
        l.rate_floor = limits.r_min_su;
        ps.links.push_back(std::move(l));
    }

    for (int n = 0; n < N; ++n) ps.c1.push_back({K + n, K + N + n});

    SumCap mbs_cap;
    mbs_cap.cap = limits.p_mbs_max_w;
    for (int k = 0; k < K; ++k) mbs_cap.vars.push_back(var_mu(k));
    for (int n = 0; n < N; ++n) mbs_cap.vars.push_back(var_bh(K, n));
    ps.caps.push_back(std::move(mbs_cap));

    ps.p_max.resize(ps.num_vars);
    for (int k = 0; k < K; ++k) ps.p_max(var_mu(k)) = limits.p_mbs_max_w;
    for (int n = 0; n < N; ++n) {
        ps.p_max(var_bh(K, n)) = limits.p_mbs_max_w;
        ps.p_max(var_sbs(K, N, n)) = limits.p_sbs_max_w;
    }
    return ps;
}

}  // namespace sbnet
