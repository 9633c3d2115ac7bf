// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "sbnet/common.hpp"
#include "sbnet/rng.hpp"

namespace sbnet {

using Point2 = std::array<double, 2>;

inline double distance(const Point2& a, const Point2& b) {
    return std::hypot(a[0] - b[0], a[1] - b[1]);
}

struct DropConfig {
    double area_side_m = 500.0;
    double su_radius_m = 40.0;  // SU drop radius around its serving SBS
    int M = 128;                // MBS antennas
    int K = 4;                  // macro users
    int N = 4;                  // small cells (one SU each)
};

struct NetworkTopology {
    double area_side = 0.0;
    Point2 mbs_position{};
    std::vector<Point2> sbs_positions;
    std::vector<Point2> mu_positions;
    std::vector<Point2> su_positions;  // one per SBS
    int M = 0;
    int K = 0;
    int N = 0;
};

// MBS at the center, SBSs and MUs i.i.d. uniform over the square, each SU
// uniform in a disc around its SBS (clipped to the area).
inline NetworkTopology drop_topology(const DropConfig& cfg, std::uint64_t seed) {
    if (cfg.K < 1 || cfg.N < 0 || cfg.M < 1) throw InvalidInput("need K >= 1, N >= 0, M >= 1");
    if (cfg.K + cfg.N >= cfg.M) throw InvalidInput("ZF requires K + N < M");
    if (!(cfg.area_side_m > 0.0) || !(cfg.su_radius_m > 0.0))
        throw InvalidInput("area_side and su_radius must be > 0");

    Rng rng(mix_seed(seed, 0x70706f44ULL));  // topology stream
    NetworkTopology t;
    t.area_side = cfg.area_side_m;
    t.M = cfg.M;
    t.K = cfg.K;
    t.N = cfg.N;
    t.mbs_position = {cfg.area_side_m / 2.0, cfg.area_side_m / 2.0};

    auto uniform_point = [&]() -> Point2 {
        return {rng.uniform(0.0, cfg.area_side_m), rng.uniform(0.0, cfg.area_side_m)};
    };

    t.sbs_positions.reserve(cfg.N);
    for (int n = 0; n < cfg.N; ++n) t.sbs_positions.push_back(uniform_point());
    t.mu_positions.reserve(cfg.K);
    for (int k = 0; k < cfg.K; ++k) t.mu_positions.push_back(uniform_point());

    t.su_positions.reserve(cfg.N);
    for (int n = 0; n < cfg.N; ++n) {
        // uniform in the disc: r = R*sqrt(u)
        const double r = cfg.su_radius_m * std::sqrt(rng.uniform());
        const double th = 2.0 * M_PI * rng.uniform();
        Point2 p{t.sbs_positions[n][0] + r * std::cos(th),
                 t.sbs_positions[n][1] + r * std::sin(th)};
        p[0] = std::clamp(p[0], 0.0, cfg.area_side_m);
        p[1] = std::clamp(p[1], 0.0, cfg.area_side_m);
        t.su_positions.push_back(p);
    }
    return t;
}

}  // namespace sbnet
