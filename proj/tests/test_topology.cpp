// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sbnet/topology.hpp"

using namespace sbnet;

TEST_CASE("same seed reproduces the drop, different seed moves it") {
    DropConfig cfg;
    const NetworkTopology a = drop_topology(cfg, 7);
    const NetworkTopology b = drop_topology(cfg, 7);
    const NetworkTopology c = drop_topology(cfg, 8);
    REQUIRE(a.K == b.K);
    for (int k = 0; k < a.K; ++k) {
        CHECK(a.mu_positions[k][0] == b.mu_positions[k][0]);
        CHECK(a.mu_positions[k][1] == b.mu_positions[k][1]);
    }
    for (int n = 0; n < a.N; ++n) {
        CHECK(a.sbs_positions[n][0] == b.sbs_positions[n][0]);
        CHECK(a.su_positions[n][1] == b.su_positions[n][1]);
    }
    CHECK(a.sbs_positions[0][0] != c.sbs_positions[0][0]);
}

TEST_CASE("MBS sits at the center, everything inside the square") {
    DropConfig cfg;
    cfg.area_side_m = 400.0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const NetworkTopology t = drop_topology(cfg, seed);
        CHECK(t.mbs_position[0] == doctest::Approx(200.0));
        CHECK(t.mbs_position[1] == doctest::Approx(200.0));
        for (const auto& p : t.sbs_positions) {
            CHECK(p[0] >= 0.0);
            CHECK(p[0] <= 400.0);
        }
        for (const auto& p : t.mu_positions) {
            CHECK(p[1] >= 0.0);
            CHECK(p[1] <= 400.0);
        }
        for (const auto& p : t.su_positions) {
            CHECK(p[0] >= 0.0);
            CHECK(p[0] <= 400.0);
        }
    }
}

TEST_CASE("SUs fall within the drop radius of their SBS") {
    DropConfig cfg;
    cfg.su_radius_m = 40.0;
    double max_r = 0.0;
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        const NetworkTopology t = drop_topology(cfg, seed);
        for (int n = 0; n < t.N; ++n) {
            const double r = distance(t.sbs_positions[n], t.su_positions[n]);
            CHECK(r <= 40.0 + 1e-12);
            max_r = std::max(max_r, r);
        }
    }
    // the disc is actually used, not a degenerate point
    CHECK(max_r > 20.0);
}

TEST_CASE("positions are uniform over the area (first-moment check)") {
    DropConfig cfg;
    cfg.N = 1;
    cfg.K = 1;
    cfg.M = 8;
    double sx = 0.0, sy = 0.0;
    const int n_drops = 10000;
    for (int seed = 0; seed < n_drops; ++seed) {
        const NetworkTopology t = drop_topology(cfg, static_cast<std::uint64_t>(seed) + 1);
        sx += t.sbs_positions[0][0];
        sy += t.mu_positions[0][1];
    }
    // mean of U(0, 500) is 250; CLT 3-sigma bound ~ 4.3 m at 1e4 samples
    CHECK(sx / n_drops == doctest::Approx(250.0).epsilon(0.02));
    CHECK(sy / n_drops == doctest::Approx(250.0).epsilon(0.02));
}

TEST_CASE("invalid configurations are rejected") {
    DropConfig cfg;
    cfg.K = 4;
    cfg.N = 4;
    cfg.M = 8;  // K + N >= M: ZF impossible
    CHECK_THROWS_AS(drop_topology(cfg, 1), InvalidInput);
    cfg = DropConfig{};
    cfg.K = 0;
    CHECK_THROWS_AS(drop_topology(cfg, 1), InvalidInput);
    cfg = DropConfig{};
    cfg.area_side_m = 0.0;
    CHECK_THROWS_AS(drop_topology(cfg, 1), InvalidInput);
    cfg = DropConfig{};
    cfg.N = 0;  // macro-only networks are allowed
    CHECK_NOTHROW(drop_topology(cfg, 1));
}
