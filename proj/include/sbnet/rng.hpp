// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

#include "sbnet/common.hpp"

namespace sbnet {

// mt19937_64 with hand-rolled uniform/normal mappings. std::*_distribution is
// implementation-defined, this keeps streams bit-identical across toolchains.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // standard normal via Box-Muller; pairs are generated eagerly
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double th = 2.0 * M_PI * u2;
        spare_ = r * std::sin(th);
        have_spare_ = true;
        return r * std::cos(th);
    }

    // circularly symmetric complex Gaussian, unit variance overall
    std::complex<double> cnormal() {
        const double s = std::sqrt(0.5);
        return {s * normal(), s * normal()};
    }

  private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace sbnet
