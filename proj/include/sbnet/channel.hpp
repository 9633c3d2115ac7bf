// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "sbnet/common.hpp"
#include "sbnet/params.hpp"
#include "sbnet/rng.hpp"
#include "sbnet/topology.hpp"

namespace sbnet {

// Scalar gains feeding the SINR ratios. Once built, every SINR in the system
// is a ratio of affine functions of the power vector; no complex arithmetic
// happens downstream of this struct.
struct EffectiveGains {
    Eigen::VectorXd a_mu;            // K   desired MU gains
    Eigen::VectorXd a_bh;            // N   desired backhaul gains
    Eigen::VectorXd a_su;            // N   desired SU access gains
    Eigen::MatrixXd c_sbs_mu;        // N x K  SBS_n -> MU_k
    Eigen::MatrixXd c_sbs_sbs;       // N x N  SBS_n' -> SBS_n, zero diagonal
    Eigen::MatrixXd c_sbs_su;        // N x N  SBS_n' -> SU_n, zero diagonal
    Eigen::MatrixXd c_mbs_su_mu;     // K x N  MU stream k -> SU_n
    Eigen::MatrixXd c_mbs_su_bh;     // N x N  backhaul stream n' -> SU_n
};

struct ChannelRealization {
    Eigen::VectorXd beta_mu;          // K  MBS -> MU_k
    Eigen::VectorXd beta_bh;          // N  MBS -> SBS_n
    Eigen::VectorXd beta_mbs_su;      // N  MBS -> SU_n
    Eigen::VectorXd beta_su;          // N  SBS_n -> SU_n
    Eigen::MatrixXd beta_cross_sbs_mu;   // N x K
    Eigen::MatrixXd beta_cross_sbs_sbs;  // N x N
    Eigen::MatrixXd beta_cross_sbs_su;   // N x N
    Eigen::MatrixXcd h_mbs;           // (K+2N) x M small-scale rows
    Eigen::MatrixXcd h_sbs_su;        // N x N  SBS_n' -> SU_n fades (diag is desired link)
    Eigen::MatrixXcd h_sbs_mu;        // N x K
    Eigen::MatrixXcd h_sbs_sbs;       // N x N, diag unused (self term modeled via gamma)
    Eigen::MatrixXcd W;               // M x (K+N), unit-norm columns
    EffectiveGains g;
    int K = 0, N = 0, M = 0;
    int zf_redraws = 0;               // singular draws redrawn with sub-seeds
};

// beta = phi * zeta / d^alpha, zeta = 10^(shadow_draw * sigma_dB / 10)
inline double large_scale_gain(double d, const FadingParams& params, double shadow_draw) {
    if (!std::isfinite(d) || !std::isfinite(shadow_draw)) throw InvalidInput("non-finite input");
    const double dc = std::max(d, kMinDistanceM);
    const double zeta = std::pow(10.0, shadow_draw * params.shadow_sigma_db / 10.0);
    return params.phi * zeta / std::pow(dc, params.alpha_pl);
}

// i.i.d. CN(0,1) entries: real and imaginary parts each of variance 1/2.
inline Eigen::MatrixXcd draw_small_scale(int rows, int cols, Rng& rng) {
    if (rows < 1 || cols < 1) throw InvalidInput("dimensions must be positive");
    Eigen::MatrixXcd h(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) h(i, j) = rng.cnormal();
    return h;
}

inline Eigen::MatrixXcd draw_small_scale(int rows, int cols, std::uint64_t seed) {
    Rng rng(seed);
    return draw_small_scale(rows, cols, rng);
}

// W = H^H (H H^H)^-1 with unit-norm columns. Within the precoding group,
// h_j * w_k = 0 for j != k.
inline Eigen::MatrixXcd zf_precoder(const Eigen::MatrixXcd& h_group) {
    const int rows = static_cast<int>(h_group.rows());
    const int cols = static_cast<int>(h_group.cols());
    if (rows > cols) throw InvalidInput("ZF needs at least as many antennas as streams");
    const Eigen::MatrixXcd gram = h_group * h_group.adjoint();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(gram);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) <= 1e-12 * sv(0)) throw SingularChannel("rank-deficient ZF group");
    Eigen::MatrixXcd w = h_group.adjoint() * gram.inverse();
    for (int j = 0; j < rows; ++j) {
        const double nrm = w.col(j).norm();
        if (!(nrm > 0.0)) throw SingularChannel("zero ZF column");
        w.col(j) /= nrm;
    }
    return w;
}

// Populates all large-scale gains, small-scale fades, the ZF precoder over the
// stacked K MU rows and N backhaul rows, and the scalar effective gains.
inline ChannelRealization build_effective_gains(const NetworkTopology& t,
                                                const FadingParams& params,
                                                std::uint64_t seed) {
    params.validate();
    const int K = t.K, N = t.N, M = t.M;
    ChannelRealization c;
    c.K = K;
    c.N = N;
    c.M = M;

    Rng shadow_rng(mix_seed(seed, 0x64616853ULL));
    auto beta = [&](const Point2& a, const Point2& b) {
        return large_scale_gain(distance(a, b), params, shadow_rng.normal());
    };

    c.beta_mu.resize(K);
    for (int k = 0; k < K; ++k) c.beta_mu(k) = beta(t.mbs_position, t.mu_positions[k]);
    c.beta_bh.resize(N);
    c.beta_mbs_su.resize(N);
    c.beta_su.resize(N);
    for (int n = 0; n < N; ++n) {
        c.beta_bh(n) = beta(t.mbs_position, t.sbs_positions[n]);
        c.beta_mbs_su(n) = beta(t.mbs_position, t.su_positions[n]);
        c.beta_su(n) = beta(t.sbs_positions[n], t.su_positions[n]);
    }
    c.beta_cross_sbs_mu.resize(N, K);
    for (int n = 0; n < N; ++n)
        for (int k = 0; k < K; ++k)
            c.beta_cross_sbs_mu(n, k) = beta(t.sbs_positions[n], t.mu_positions[k]);
    c.beta_cross_sbs_sbs = Eigen::MatrixXd::Zero(N, N);
    c.beta_cross_sbs_su = Eigen::MatrixXd::Zero(N, N);
    for (int np = 0; np < N; ++np)
        for (int n = 0; n < N; ++n) {
            if (np != n) c.beta_cross_sbs_sbs(np, n) = beta(t.sbs_positions[np], t.sbs_positions[n]);
            if (np != n) c.beta_cross_sbs_su(np, n) = beta(t.sbs_positions[np], t.su_positions[n]);
        }

    // small-scale fading; a singular ZF draw is redrawn with an incremented
    // sub-seed
    const int rows = K + 2 * N;
    for (int attempt = 0;; ++attempt) {
        if (attempt > 32) throw SingularChannel("persistent rank-deficient fading");
        Rng fast_rng(mix_seed(seed, 0x74736146ULL, static_cast<std::uint64_t>(attempt)));
        c.h_mbs = draw_small_scale(rows, M, fast_rng);
        if (N > 0) {
            c.h_sbs_su = draw_small_scale(N, N, fast_rng);
            c.h_sbs_mu = draw_small_scale(N, K, fast_rng);
            c.h_sbs_sbs = draw_small_scale(N, N, fast_rng);
        } else {
            c.h_sbs_su.resize(0, 0);
            c.h_sbs_mu.resize(0, K);
            c.h_sbs_sbs.resize(0, 0);
        }
        try {
            c.W = zf_precoder(c.h_mbs.topRows(K + N));
            c.zf_redraws = attempt;
            break;
        } catch (const SingularChannel&) {
            continue;
        }
    }

    EffectiveGains& g = c.g;
    g.a_mu.resize(K);
    for (int k = 0; k < K; ++k)
        g.a_mu(k) = c.beta_mu(k) * std::norm((c.h_mbs.row(k) * c.W.col(k)).value());
    g.a_bh.resize(N);
    g.a_su.resize(N);
    for (int n = 0; n < N; ++n) {
        g.a_bh(n) = c.beta_bh(n) * std::norm((c.h_mbs.row(K + n) * c.W.col(K + n)).value());
        g.a_su(n) = c.beta_su(n) * std::norm(c.h_sbs_su(n, n));
    }
    g.c_sbs_mu.resize(N, K);
    for (int n = 0; n < N; ++n)
        for (int k = 0; k < K; ++k)
            g.c_sbs_mu(n, k) = c.beta_cross_sbs_mu(n, k) * std::norm(c.h_sbs_mu(n, k));
    g.c_sbs_sbs = Eigen::MatrixXd::Zero(N, N);
    g.c_sbs_su = Eigen::MatrixXd::Zero(N, N);
    for (int np = 0; np < N; ++np)
        for (int n = 0; n < N; ++n) {
            if (np == n) continue;
            g.c_sbs_sbs(np, n) = c.beta_cross_sbs_sbs(np, n) * std::norm(c.h_sbs_sbs(np, n));
            g.c_sbs_su(np, n) = c.beta_cross_sbs_su(np, n) * std::norm(c.h_sbs_su(np, n));
        }
    // SU-side MBS terms: the SU's own row against every MBS precoding column
    g.c_mbs_su_mu.resize(K, N);
    g.c_mbs_su_bh.resize(N, N);
    for (int n = 0; n < N; ++n) {
        const auto su_row = c.h_mbs.row(K + N + n);
        for (int k = 0; k < K; ++k)
            g.c_mbs_su_mu(k, n) = c.beta_mbs_su(n) * std::norm((su_row * c.W.col(k)).value());
        for (int np = 0; np < N; ++np)
            g.c_mbs_su_bh(np, n) =
                c.beta_mbs_su(n) * std::norm((su_row * c.W.col(K + np)).value());
    }
    return c;
}

}  // namespace sbnet
