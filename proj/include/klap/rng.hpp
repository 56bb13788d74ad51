// Copyright contributors to the klap project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>

namespace klap {

// Counter-based 64-bit generator (splitmix64 core). Streams derived from a
// (global_seed, stream_id) pair are independent of draw order elsewhere, so
// per-image synthesis can run in any order and still reproduce bit-exact.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    static uint64_t mix(uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Derive an independent stream from a global seed and a stream index.
    static Rng derive(uint64_t global_seed, uint64_t stream_id) {
        return Rng(mix(mix(global_seed) ^ mix(stream_id * 0x9e3779b97f4a7c15ull + 0x632be59bd9b4e019ull)));
    }

    uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform double in [0, 1).
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n), rejection-free enough for small n via 64-bit modulo bias
    // avoidance (Lemire-style).
    uint64_t below(uint64_t n) {
        if (n == 0) return 0;
        uint64_t threshold = (0 - n) % n;
        for (;;) {
            uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    // Standard normal via Box-Muller; second value cached.
    double gaussian() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = 1.0 - uniform(); // (0, 1]
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(theta);
        have_cached_ = true;
        return r * std::cos(theta);
    }

    double gaussian(double mean, double stddev) { return mean + stddev * gaussian(); }

    // Poisson sample. Inversion by sequential search for small means, rounded
    // Gaussian approximation (clamped at zero) above the threshold.
    int64_t poisson(double mean) {
        if (mean <= 0.0) return 0;
        if (mean <= 30.0) {
            double u = uniform();
            double p = std::exp(-mean);
            double cdf = p;
            int64_t k = 0;
            while (u > cdf && k < 4096) {
                ++k;
                p *= mean / double(k);
                cdf += p;
            }
            return k;
        }
        double g = gaussian(mean, std::sqrt(mean));
        int64_t k = llround(g);
        return k < 0 ? 0 : k;
    }

private:
    uint64_t state_;
    bool have_cached_ = false;
    double cached_ = 0.0;
};

} // namespace klap
