#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "fastlink/common.hpp"

namespace fastlink::rng {

/// splitmix64 step; used to derive independent stream seeds from a master seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic seed for a substream identified by up to three integer tags.
inline std::uint64_t derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                            std::uint64_t c = 0) {
    std::uint64_t s = seed;
    std::uint64_t z = splitmix64(s);
    s ^= a + 0x632be59bd9b4e019ULL;
    z ^= splitmix64(s);
    s ^= b + 0x9e6c63d0876a9a47ULL;
    z ^= splitmix64(s);
    s ^= c + 0xc2b2ae3d27d4eb4fULL;
    z ^= splitmix64(s);
    return z;
}

/// mt19937_64 with explicit output transforms so sequences are identical
/// across standard libraries (std::*_distribution is implementation-defined).
class Generator {
  public:
    explicit Generator(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; one deviate per call, pair cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * uniform();
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    /// Circularly symmetric complex Gaussian with total variance `var`
    /// (var/2 per real dimension). var = 0 yields exactly 0.
    cplx cnormal(double var) {
        if (var <= 0.0) return cplx(0.0, 0.0);
        const double s = std::sqrt(var * 0.5);
        const double re = normal();
        const double im = normal();
        return cplx(s * re, s * im);
    }

  private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace fastlink::rng
