#pragma once

// Deterministic pseudo-random streams.  Everything randomized in the library
// (problem generators, probe sampling, test fixtures) draws from SplitMix64
// so that a seed fully determines the output on every platform.

#include <cmath>
#include <cstdint>
#include <string>

#include "opsplit/common.hpp"

namespace opsplit {

class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0,1) with 53 random bits.
    double uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + int(below(std::uint64_t(hi - lo + 1)));
    }

    // Box-Muller; consumes exactly two uniforms per pair of normals.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01(), u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // Inversion by sequential search; fine for the modest rates used here.
    std::uint64_t poisson(double rate) {
        if (rate < 0.0) throw NumericalError("poisson: negative rate");
        if (rate == 0.0) return 0;
        double u = uniform01();
        double p = std::exp(-rate), cdf = p;
        std::uint64_t k = 0;
        while (u > cdf && k < 10'000'000) {
            ++k;
            p *= rate / double(k);
            cdf += p;
        }
        return k;
    }

    Vector normal_vector(std::size_t d) {
        Vector v(d);
        for (auto& x : v) x = normal();
        return v;
    }

  private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Independent substream: hash the tag into the seed so distinct tags give
// decorrelated streams for the same top-level seed.
inline SplitMix64 derive_stream(std::uint64_t seed, const std::string& tag) {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (unsigned char c : tag) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    SplitMix64 mixer(seed ^ h);
    mixer.next_u64();
    return SplitMix64(mixer.next_u64());
}

}  // namespace opsplit
