#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace survadv {

// FNV-1a 64-bit hash; used for seeding per-entity RNG streams and for
// config/content fingerprints. Stable across platforms.
inline std::uint64_t fnv1a64(std::string_view data,
                             std::uint64_t seed = 0xcbf29ce484222325ull) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

// SplitMix64: tiny deterministic PRNG with identical output on every
// platform. std::mt19937 plus the std distributions are avoided on purpose:
// distribution output is implementation-defined and would break byte-level
// reproducibility of generated artifacts.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 bits of precision.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n) {
        // Modulo bias is negligible for the small n used here.
        return next_u64() % n;
    }

    // Standard normal via Box-Muller (explicit formula, no std distribution).
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_double();
        double u2 = next_double();
        while (u1 <= 1e-300) u1 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // Exponential with the given rate.
    double next_exponential(double rate) {
        double u = next_double();
        while (u <= 1e-300) u = next_double();
        return -std::log(u) / rate;
    }

  private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace survadv
