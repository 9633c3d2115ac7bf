// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace sbnet {

inline constexpr double kLn2 = 0.6931471805599453094;

// Strict positivity floor for powers; "off" links sit at the floor so the
// log-domain transform stays finite.
inline constexpr double kPowerFloorW = 1e-10;

// Minimum link distance in meters, clamps the path-loss singularity.
inline constexpr double kMinDistanceM = 1.0;

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

inline double log2p(double x) { return std::log2(1.0 + x); }

struct InvalidInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct SingularChannel : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InfeasibleStart : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericalBreakdown : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NoFeasibleGridPoint : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// splitmix64; used to derive independent sub-seeds so results do not depend
// on how work is scheduled across workers.
inline std::uint64_t mix_seed(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    return mix_seed(mix_seed(a) ^ b);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix_seed(mix_seed(a, b) ^ c);
}

}  // namespace sbnet
