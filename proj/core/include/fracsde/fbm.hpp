#pragma once

#include <cstdint>

#include "fracsde/time_grid.hpp"

// Sampling of fractional Brownian motion (fBm) with Hurst index H in
// (1/2, 1): a centered Gaussian process B with B(0) = 0 and
//
//     E[B(t)B(s)] = (t^2H + s^2H - |t-s|^2H) / 2.
//
// Two exact-in-distribution schemes:
//
//   cholesky   Factor the full covariance matrix of the node values. O(N^3)
//              setup, O(N^2) per path, no structural assumptions. Default.
//   circulant  Embed the (stationary) increment covariance into a circulant
//              matrix of size 2N and diagonalize it by FFT. O(N log N) per
//              path; the method of choice beyond a few thousand steps. The
//              embedding is checked for nonnegative eigenvalues at setup.
//
// Both schemes cache their per-(H, N) setup, scale it by dt^H at sample
// time, and consume normals from SplitMix64(seed) in a fixed order, so a
// given config yields bit-identical paths on the same platform. The caches
// have interior locking; sampling is safe from concurrent threads.

namespace fracsde {

enum class FbmMethod { cholesky, circulant };

struct FbmConfig {
    double hurst;
    TimeGrid grid;
    std::uint64_t seed = 0;
    FbmMethod method = FbmMethod::cholesky;
};

// Level for freezing a path once it leaves the ball of radius R in either
// the running sup or the running Holder norm.
struct TruncationLevel {
    double radius;
    HolderExponent beta;
};

struct TruncationResult {
    SampledPath path;
    double tau; // first grid node at which a violation was detected, or T
};

// E[B(t)B(s)]; negative times are a domain error.
double fbm_covariance(double hurst, double t, double s);

SampledPath sample_fbm(const FbmConfig& config);

// Scans nodes left to right and returns tau = the first node at which
// |B(t)| > R or |B|_{0,t,beta} > R (T if none). The returned path equals the
// input strictly before tau and stays at the last compliant value from tau
// on, so it respects the level: sup of the result never exceeds R, and its
// Holder norm stays within 2R once the grid resolves the path.
TruncationResult truncate(const SampledPath& path, const TruncationLevel& level);

} // namespace fracsde
