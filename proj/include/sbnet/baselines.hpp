// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sbnet/cccp.hpp"
#include "sbnet/channel.hpp"
#include "sbnet/common.hpp"
#include "sbnet/params.hpp"
#include "sbnet/problem.hpp"
#include "sbnet/rates.hpp"

namespace sbnet {

enum class SchemeId { ProposedFdMassiveMimo, HdMassiveMimo, FdNoMassiveMimo, WiredNoMassiveMimo };

inline const char* to_string(SchemeId s) {
    switch (s) {
        case SchemeId::ProposedFdMassiveMimo: return "proposed_fd_mmimo";
        case SchemeId::HdMassiveMimo: return "hd_mmimo";
        case SchemeId::FdNoMassiveMimo: return "fd_no_mmimo";
        case SchemeId::WiredNoMassiveMimo: return "wired_no_mmimo";
    }
    return "?";
}

inline SchemeId scheme_from_string(const std::string& s) {
    if (s == "proposed_fd_mmimo" || s == "proposed") return SchemeId::ProposedFdMassiveMimo;
    if (s == "hd_mmimo" || s == "hd") return SchemeId::HdMassiveMimo;
    if (s == "fd_no_mmimo" || s == "fd") return SchemeId::FdNoMassiveMimo;
    if (s == "wired_no_mmimo" || s == "wired") return SchemeId::WiredNoMassiveMimo;
    throw InvalidInput("unknown scheme: " + s);
}

struct GridSpec {
    int points_per_axis = 50;
    double p_min = 1e-6;  // watts; per-axis max comes from the power limits
};

// Exhaustive log-spaced grid search over the original problem. Near-optimal
// reference for tiny instances; guards against combinatorial explosion.
inline std::pair<PowerVector, double> bfs_oracle(const EffectiveGains& g,
                                                 const FadingParams& params,
                                                 const PowerLimits& limits, const GridSpec& grid) {
    const int K = static_cast<int>(g.a_mu.size());
    const int N = static_cast<int>(g.a_bh.size());
    const int dim = K + 2 * N;
    if (grid.points_per_axis < 2) throw InvalidInput("need at least 2 grid points per axis");
    const double total_points = std::pow(static_cast<double>(grid.points_per_axis), dim);
    if (total_points > 1e8) throw InvalidInput("grid too large (> 1e8 points)");

    auto axis_max = [&](int j) {
        return j < K + N ? limits.p_mbs_max_w : limits.p_sbs_max_w;
    };
    std::vector<std::vector<double>> axis(dim);
    for (int j = 0; j < dim; ++j) {
        axis[j].resize(grid.points_per_axis);
        const double lo = std::log(grid.p_min), hi = std::log(axis_max(j));
        for (int i = 0; i < grid.points_per_axis; ++i)
            axis[j][i] = std::exp(lo + (hi - lo) * i / (grid.points_per_axis - 1));
    }

    std::vector<int> idx(dim, 0);
    PowerVector best;
    double best_obj = -std::numeric_limits<double>::infinity();
    PowerVector p;
    p.p_mu.resize(K);
    p.p_bh.resize(N);
    p.p_sbs.resize(N);
    while (true) {
        for (int k = 0; k < K; ++k) p.p_mu(k) = axis[k][idx[k]];
        for (int n = 0; n < N; ++n) p.p_bh(n) = axis[K + n][idx[K + n]];
        for (int n = 0; n < N; ++n) p.p_sbs(n) = axis[K + N + n][idx[K + N + n]];

        const ConstraintReport cr = check_constraints(p, g, params, limits, 1e-12);
        if (cr.feasible) {
            const double obj = objective(p, g, params).total;
            if (obj > best_obj) {
                best_obj = obj;
                best = p;
            }
        }
        int j = 0;
        for (; j < dim; ++j) {
            if (++idx[j] < grid.points_per_axis) break;
            idx[j] = 0;
        }
        if (j == dim) break;
    }
    if (!std::isfinite(best_obj)) throw NoFeasibleGridPoint("no feasible grid point");
    return {best, best_obj};
}

struct SchemeResult {
    RateTriple rates;
    Termination termination = Termination::Infeasible;
    double backhaul_power_w = 0.0;
    int iterations = 0;
    double wall_time_s = 0.0;
};

namespace detail {

// antenna-0 fade power for single-stream (non-massive-MIMO) transmissions
inline double single_antenna_gain(const ChannelRealization& ch, int row) {
    return std::norm(ch.h_mbs(row, 0));
}

inline SchemeResult run_proposed(const ChannelRealization& ch, const FadingParams& params,
                                 const PowerLimits& limits, const SolverConfig& cfg,
                                 bool half_duplex) {
    FadingParams p = params;
    double su_weight = 1.0;
    if (half_duplex) {
        // the SBS never transmits while receiving backhaul, so no residual
        // self-interference, but each SBS delivers in half the slots
        p.gamma_si = 0.0;
        su_weight = 0.5;
    }
    const ProblemSpec ps = build_problem(ch.g, p, limits, su_weight);
    SolverReport rep = solve_problem(ps, cfg);

    SchemeResult out;
    out.termination = rep.termination;
    out.iterations = rep.inner_iterations_total;
    out.wall_time_s = rep.wall_time_s;
    if (rep.termination == Termination::Infeasible) return out;

    const PowerVector pw = PowerVector::from_log_flat(rep.final_x, ch.K, ch.N);
    RateTriple r = objective(pw, ch.g, p);
    if (half_duplex) {
        r.r_su *= 0.5;
        r.r_bh *= 0.5;
        r.total = r.r_mu.sum() + r.r_su.sum();
    }
    out.rates = r;
    out.backhaul_power_w = pw.p_bh.sum();
    return out;
}

// Wired backhaul: TDMA macro tier at full single-stream power, infinite free
// backhaul, SBS access powers from a reduced optimization over P^s only.
inline SchemeResult run_wired(const ChannelRealization& ch, const FadingParams& params,
                              const PowerLimits& limits, const SolverConfig& cfg) {
    const int K = ch.K, N = ch.N;
    const auto t0 = std::chrono::steady_clock::now();
    SchemeResult out;

    ProblemSpec ps;
    ps.num_vars = N;
    ps.sinr_gap = params.sinr_gap;
    for (int k = 0; k < K; ++k) {
        Link l;
        l.own = -1;
        l.gain = limits.p_mbs_max_w * ch.beta_mu(k) * single_antenna_gain(ch, k);
        l.denom = Eigen::VectorXd::Zero(N);
        for (int n = 0; n < N; ++n) l.denom(n) = ch.g.c_sbs_mu(n, k);
        l.denom_const = params.noise_power;
        l.weight = 1.0 / K;                    // TDMA slot share
        l.rate_floor = K * limits.r_min_mu;    // floor on the delivered (1/K) rate
        ps.links.push_back(std::move(l));
    }
    for (int n = 0; n < N; ++n) {
        Link l;
        l.own = n;
        l.gain = ch.g.a_su(n);
        l.denom = Eigen::VectorXd::Zero(N);
        for (int np = 0; np < N; ++np)
            if (np != n) l.denom(np) = ch.g.c_sbs_su(np, n);
        // full-power MBS stream toward the slot MU, single antenna
        l.denom_const = params.noise_power +
                        limits.p_mbs_max_w * ch.beta_mbs_su(n) * single_antenna_gain(ch, K + N + n);
        l.weight = 1.0;
        l.rate_floor = limits.r_min_su;
        ps.links.push_back(std::move(l));
    }
    ps.p_max = Eigen::VectorXd::Constant(std::max(N, 1), limits.p_sbs_max_w);

    if (N == 0) {
        Eigen::VectorXd x(0);
        out.rates.r_mu.resize(K);
        for (int k = 0; k < K; ++k) out.rates.r_mu(k) = link_rate(ps.links[k], x, ps.sinr_gap) / K;
        out.rates.r_bh.resize(0);
        out.rates.r_su.resize(0);
        out.rates.total = out.rates.r_mu.sum();
        out.termination = Termination::Converged;
        out.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return out;
    }

    SolverReport rep = solve_problem(ps, cfg);
    out.termination = rep.termination;
    out.iterations = rep.inner_iterations_total;
    out.wall_time_s = rep.wall_time_s;
    if (rep.termination == Termination::Infeasible) return out;

    out.rates.r_mu.resize(K);
    out.rates.r_su.resize(N);
    out.rates.r_bh = Eigen::VectorXd::Zero(N);  // cable: no radio backhaul
    for (int k = 0; k < K; ++k)
        out.rates.r_mu(k) = link_rate(ps.links[k], rep.final_x, ps.sinr_gap) / K;
    for (int n = 0; n < N; ++n)
        out.rates.r_su(n) = link_rate(ps.links[K + n], rep.final_x, ps.sinr_gap);
    out.rates.total = out.rates.r_mu.sum() + out.rates.r_su.sum();
    out.backhaul_power_w = 0.0;
    return out;
}

// FD self-backhaul without massive MIMO: fraction eta to the macro tier
// (TDMA among MUs), 1-eta shared by backhaul (TDMA among SBSs) and SU access,
// with FD self-interference at the SBSs. Full fixed powers, eta from a scalar
// grid search.
inline SchemeResult run_fd_no_mmimo(const ChannelRealization& ch, const FadingParams& params,
                                    const PowerLimits& limits) {
    const int K = ch.K, N = ch.N;
    const auto t0 = std::chrono::steady_clock::now();

    Eigen::VectorXd mu_full(K);
    for (int k = 0; k < K; ++k) {
        const double xi = limits.p_mbs_max_w * ch.beta_mu(k) * single_antenna_gain(ch, k) /
                          params.noise_power;
        mu_full(k) = std::log2(1.0 + xi / params.sinr_gap);
    }
    Eigen::VectorXd bh_full(N), su_full(N);
    for (int n = 0; n < N; ++n) {
        double denom_b = params.noise_power + params.gamma_si * limits.p_sbs_max_w;
        double denom_s = params.noise_power +
                         limits.p_mbs_max_w * ch.beta_mbs_su(n) * single_antenna_gain(ch, K + N + n);
        for (int np = 0; np < N; ++np) {
            if (np == n) continue;
            denom_b += limits.p_sbs_max_w * ch.g.c_sbs_sbs(np, n);
            denom_s += limits.p_sbs_max_w * ch.g.c_sbs_su(np, n);
        }
        const double xi_b =
            limits.p_mbs_max_w * ch.beta_bh(n) * single_antenna_gain(ch, K + n) / denom_b;
        const double xi_s = limits.p_sbs_max_w * ch.g.a_su(n) / denom_s;
        bh_full(n) = std::log2(1.0 + xi_b / params.sinr_gap);
        su_full(n) = std::log2(1.0 + xi_s / params.sinr_gap);
    }

    SchemeResult out;
    double best = -1.0;
    for (int i = 1; i < 100; ++i) {
        const double eta = i / 100.0;
        RateTriple r;
        r.r_mu = (eta / K) * mu_full;
        r.r_bh = ((1.0 - eta) / std::max(N, 1)) * bh_full;
        r.r_su.resize(N);
        for (int n = 0; n < N; ++n)
            r.r_su(n) = std::min((1.0 - eta) * su_full(n), r.r_bh(n));
        r.total = r.r_mu.sum() + r.r_su.sum();
        if (r.total > best) {
            best = r.total;
            out.rates = r;
        }
    }
    out.termination = Termination::Converged;
    out.backhaul_power_w = limits.p_mbs_max_w;  // MBS budget spent on the backhaul band
    out.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

}  // namespace detail

inline SchemeResult run_scheme(SchemeId scheme, const ChannelRealization& ch,
                               const FadingParams& params, const PowerLimits& limits,
                               const SolverConfig& cfg) {
    switch (scheme) {
        case SchemeId::ProposedFdMassiveMimo:
            return detail::run_proposed(ch, params, limits, cfg, false);
        case SchemeId::HdMassiveMimo:
            return detail::run_proposed(ch, params, limits, cfg, true);
        case SchemeId::FdNoMassiveMimo:
            return detail::run_fd_no_mmimo(ch, params, limits);
        case SchemeId::WiredNoMassiveMimo:
            return detail::run_wired(ch, params, limits, cfg);
    }
    throw InvalidInput("unhandled scheme");
}

}  // namespace sbnet
