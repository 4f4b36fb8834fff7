#pragma once

#include <cstdint>
#include <cmath>
#include <numbers>
#include <vector>

// Counter-style pseudo-random numbers for reproducible Monte Carlo.
//
// Two requirements rule out <random> here:
//   1. bit-reproducibility: std::normal_distribution is not pinned down at
//      the bit level and differs across standard libraries;
//   2. cheap stream splitting: Monte Carlo batches seed sample i with
//      base_seed + i, so even adjacent seeds must give decorrelated streams.
// splitmix64 handles both (every 64-bit seed is a separate well-mixed
// stream), and Box-Muller on top of it is fully specified arithmetic.

namespace fracsde {

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform on (0,1), never exactly 0 or 1, so log() stays finite.
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Box-Muller pair of independent standard normals; consumes exactly two
    // 64-bit draws, which keeps every consumer's draw count predictable.
    void next_normal_pair(double& z0, double& z1) {
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        z0 = r * std::cos(a);
        z1 = r * std::sin(a);
    }

    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double z0, z1;
        next_normal_pair(z0, z1);
        spare_ = z1;
        have_spare_ = true;
        return z0;
    }

    std::vector<double> normals(std::size_t n) {
        std::vector<double> out(n);
        for (std::size_t i = 0; i + 1 < n; i += 2) next_normal_pair(out[i], out[i + 1]);
        if (n % 2 != 0) {
            double z0, z1;
            next_normal_pair(z0, z1);
            out[n - 1] = z0;
        }
        return out;
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace fracsde
