#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace lintel {

// Deterministic random source. std::normal_distribution is
// implementation-defined, so normals are produced by Box-Muller on top of
// mt19937_64; a given seed yields the same stream on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform draw in (0, 1].
    double uniform() {
        return static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * 3.14159265358979323846 * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

    /// Uniform integer in [0, n).
    std::uint64_t index(std::uint64_t n) {
        const double u = uniform();
        auto i = static_cast<std::uint64_t>(u * static_cast<double>(n));
        return i >= n ? n - 1 : i;
    }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace lintel
