// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "sbnet/common.hpp"

namespace sbnet {

// Large-scale fading and receiver-side constants shared by every link.
struct FadingParams {
    double phi = 1.0;             // carrier/antenna constant, 0 dB at 1 m
    double alpha_pl = 3.0;        // path loss exponent (gain ~ d^-alpha_pl)
    double shadow_sigma_db = 8.0; // std dev of 10*log10(shadowing)
    double noise_power = 3.981071705534972e-14;  // watts; -174 dBm/Hz over 10 MHz
    double gamma_si = 1e-5;       // residual self-interference factor
    double sinr_gap = 3.532211577698691;  // omega = -2*ln(5*Pe)/3 at Pe = 1e-3

    void validate() const {
        if (!(phi > 0.0)) throw InvalidInput("phi must be > 0");
        if (!(noise_power > 0.0)) throw InvalidInput("noise_power must be > 0");
        if (!(gamma_si >= 0.0)) throw InvalidInput("gamma_si must be >= 0");
        if (!(sinr_gap > 0.0)) throw InvalidInput("sinr_gap must be > 0");
        if (!std::isfinite(phi) || !std::isfinite(alpha_pl) || !std::isfinite(shadow_sigma_db))
            throw InvalidInput("non-finite fading parameter");
    }

    static double sinr_gap_from_ber(double pe) { return -2.0 * std::log(5.0 * pe) / 3.0; }
};

// Power caps and QoS floors of the allocation problem.
struct PowerLimits {
    double p_mbs_max_w = 39.810717055349734;  // 46 dBm
    double p_sbs_max_w = 0.1;                 // 20 dBm
    double r_min_mu = 2.0;                    // bits/s/Hz
    double r_min_su = 2.0;                    // bits/s/Hz, relaxable separately
};

// The 2N+K allocation [P^m_1..K, P^b_1..N, P^s_1..N], linear watts.
struct PowerVector {
    Eigen::VectorXd p_mu;   // K
    Eigen::VectorXd p_bh;   // N
    Eigen::VectorXd p_sbs;  // N

    int K() const { return static_cast<int>(p_mu.size()); }
    int N() const { return static_cast<int>(p_bh.size()); }
    int dim() const { return K() + 2 * N(); }

    static PowerVector uniform(int K, int N, double mu, double bh, double sbs) {
        PowerVector p;
        p.p_mu = Eigen::VectorXd::Constant(K, mu);
        p.p_bh = Eigen::VectorXd::Constant(N, bh);
        p.p_sbs = Eigen::VectorXd::Constant(N, sbs);
        return p;
    }

    Eigen::VectorXd flat() const {
        Eigen::VectorXd v(dim());
        v << p_mu, p_bh, p_sbs;
        return v;
    }

    static PowerVector from_flat(const Eigen::VectorXd& v, int K, int N) {
        PowerVector p;
        p.p_mu = v.segment(0, K);
        p.p_bh = v.segment(K, N);
        p.p_sbs = v.segment(K + N, N);
        return p;
    }

    // Log-domain transform; entries are clamped to the power floor first.
    Eigen::VectorXd log_flat() const {
        return flat().cwiseMax(kPowerFloorW).array().log().matrix();
    }

    static PowerVector from_log_flat(const Eigen::VectorXd& x, int K, int N) {
        return from_flat(x.array().exp().matrix(), K, N);
    }
};

struct RateTriple {
    Eigen::VectorXd r_mu;  // K
    Eigen::VectorXd r_bh;  // N, capacity couplers, not part of total
    Eigen::VectorXd r_su;  // N
    double total = 0.0;    // sum(r_mu) + sum(r_su)
};

}  // namespace sbnet
