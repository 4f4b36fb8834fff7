#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <vector>

#include "fracsde/fbm.hpp"
#include "fracsde/rng.hpp"
#include "fracsde/time_grid.hpp"

using namespace fracsde;

namespace {

double mean_of(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double variance_of(const std::vector<double>& x) {
    const double m = mean_of(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

double covariance_of(const std::vector<double>& x, const std::vector<double>& y) {
    const double mx = mean_of(x);
    const double my = mean_of(y);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - mx) * (y[i] - my);
    return s / static_cast<double>(x.size() - 1);
}

// 3-sigma band for an empirical covariance of a centered Gaussian pair.
double cov_tolerance(double cxx, double cyy, double cxy, std::size_t n) {
    return 3.0 * std::sqrt((cxx * cyy + cxy * cxy) / static_cast<double>(n));
}

} // namespace

TEST_CASE("fbm covariance closed form") {
    // H = 3/4 spot values: E[B(t)B(s)] = (t^1.5 + s^1.5 - |t-s|^1.5) / 2.
    CHECK(fbm_covariance(0.75, 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(fbm_covariance(0.75, 0.5, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(fbm_covariance(0.75, 2.0, 1.0) ==
          doctest::Approx(1.4142135623730951).epsilon(1e-15));
    CHECK(fbm_covariance(0.75, 2.0, 2.0) ==
          doctest::Approx(2.8284271247461903).epsilon(1e-15));
    CHECK(fbm_covariance(0.9, 0.7, 0.0) == 0.0);

    for (double t : {0.3, 1.0, 2.5})
        for (double s : {0.1, 0.8, 4.0})
            CHECK(fbm_covariance(0.6, t, s) == fbm_covariance(0.6, s, t));

    // Variance grows like t^2H.
    CHECK(fbm_covariance(0.8, 3.0, 3.0) ==
          doctest::Approx(std::pow(3.0, 1.6)).epsilon(1e-15));

    CHECK_THROWS_AS(fbm_covariance(0.5, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(fbm_covariance(1.0, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(fbm_covariance(0.3, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(fbm_covariance(0.75, -0.1, 1.0), DomainError);
}

TEST_CASE("rng normal stream") {
    SplitMix64 rng(42);
    const std::size_t n = 200000;
    std::vector<double> z = rng.normals(n);

    CHECK(std::abs(mean_of(z)) < 3.0 / std::sqrt(static_cast<double>(n)));
    CHECK(std::abs(variance_of(z) - 1.0) < 3.0 * std::sqrt(2.0 / static_cast<double>(n)));

    // Same seed replays the identical stream; the block API is a prefix of
    // any longer block from the same seed.
    SplitMix64 a(7), b(7);
    auto za = a.normals(3);
    auto zb = b.normals(4);
    CHECK(za[0] == zb[0]);
    CHECK(za[1] == zb[1]);
    CHECK(za[2] == zb[2]);

    SplitMix64 u(123);
    for (int i = 0; i < 1000; ++i) {
        const double v = u.next_uniform();
        CHECK(v > 0.0);
        CHECK(v < 1.0);
    }
}

TEST_CASE("fbm sampling is deterministic per seed") {
    const TimeGrid grid(1.0, 32);
    for (FbmMethod method : {FbmMethod::cholesky, FbmMethod::circulant}) {
        FbmConfig c{0.75, grid, 11, method};
        const SampledPath p1 = sample_fbm(c);
        const SampledPath p2 = sample_fbm(c);
        CHECK(p1.values() == p2.values()); // bitwise reproducible
        CHECK(p1.values()[0] == 0.0);
        CHECK(p1.all_finite());

        c.seed = 12;
        const SampledPath p3 = sample_fbm(c);
        CHECK(p1.values() != p3.values());
    }
    CHECK_THROWS_AS(sample_fbm(FbmConfig{0.5, grid, 0, FbmMethod::cholesky}), DomainError);
    CHECK_THROWS_AS(sample_fbm(FbmConfig{1.2, grid, 0, FbmMethod::cholesky}), DomainError);
}

TEST_CASE("fbm marginal variance matches t^2H") {
    // One-step grid with T = 2: Var B(T) = T^2H = 2^1.5.
    const TimeGrid grid(2.0, 1);
    const std::size_t n = 100000;
    std::vector<double> endpoint(n);
    for (std::size_t i = 0; i < n; ++i) {
        endpoint[i] =
            sample_fbm(FbmConfig{0.75, grid, i, FbmMethod::cholesky}).values()[1];
    }
    const double target = std::pow(2.0, 1.5);
    const double tol = 3.0 * target * std::sqrt(2.0 / static_cast<double>(n));
    CHECK(std::abs(mean_of(endpoint)) < 3.0 * std::sqrt(target / static_cast<double>(n)));
    CHECK(std::abs(variance_of(endpoint) - target) < tol);
}

TEST_CASE("fbm joint covariance of mid and final node") {
    // (B(1/2), B(1)) at H = 3/4 has covariance matrix
    //   [ 0.5^1.5   0.5    ]
    //   [ 0.5       1.0    ].
    const TimeGrid grid(1.0, 2);
    const std::size_t n = 100000;
    std::vector<double> mid(n), fin(n);
    for (std::size_t i = 0; i < n; ++i) {
        const SampledPath b = sample_fbm(FbmConfig{0.75, grid, i, FbmMethod::cholesky});
        mid[i] = b.values()[1];
        fin[i] = b.values()[2];
    }
    const double c11 = std::pow(0.5, 1.5);
    const double c12 = 0.5;
    const double c22 = 1.0;
    CHECK(std::abs(variance_of(mid) - c11) < cov_tolerance(c11, c11, c11, n));
    CHECK(std::abs(variance_of(fin) - c22) < cov_tolerance(c22, c22, c22, n));
    CHECK(std::abs(covariance_of(mid, fin) - c12) < cov_tolerance(c11, c22, c12, n));
}

TEST_CASE("fbm increments are stationary and positively correlated") {
    const std::size_t steps = 8;
    const TimeGrid grid(1.0, steps);
    const std::size_t n = 20000;
    std::vector<std::vector<double>> inc(steps, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const SampledPath b = sample_fbm(FbmConfig{0.75, grid, i, FbmMethod::cholesky});
        for (std::size_t k = 0; k < steps; ++k) inc[k][i] = b.values()[k + 1] - b.values()[k];
    }
    const double var_target = std::pow(grid.dt(), 1.5);
    const double tol = 3.0 * var_target * std::sqrt(2.0 / static_cast<double>(n));
    for (std::size_t k = 0; k < steps; ++k)
        CHECK(std::abs(variance_of(inc[k]) - var_target) < tol);

    // Lag-1 increment correlation for H > 1/2 is (2^2H - 2)/2 > 0.
    const double rho = (std::pow(2.0, 1.5) - 2.0) / 2.0;
    const double corr = covariance_of(inc[2], inc[3]) /
                        std::sqrt(variance_of(inc[2]) * variance_of(inc[3]));
    CHECK(std::abs(corr - rho) < 0.05);
    CHECK(corr > 0.0);
}

TEST_CASE("circulant sampling agrees with the covariance") {
    const TimeGrid grid(1.0, 16);
    const std::size_t n = 20000;
    std::vector<double> mid(n), fin(n);
    for (std::size_t i = 0; i < n; ++i) {
        const SampledPath b = sample_fbm(FbmConfig{0.75, grid, i, FbmMethod::circulant});
        mid[i] = b.values()[8];
        fin[i] = b.values()[16];
    }
    const double c11 = std::pow(0.5, 1.5);
    const double c12 = 0.5;
    const double c22 = 1.0;
    CHECK(std::abs(variance_of(mid) - c11) < cov_tolerance(c11, c11, c11, n));
    CHECK(std::abs(variance_of(fin) - c22) < cov_tolerance(c22, c22, c22, n));
    CHECK(std::abs(covariance_of(mid, fin) - c12) < cov_tolerance(c11, c22, c12, n));
}

TEST_CASE("truncation freezes at the first violating node") {
    const TimeGrid grid(1.0, 4);
    const SampledPath path(grid, {0.0, 0.2, 0.5, 1.1, 0.9});
    const TruncationLevel level{1.0, HolderExponent(0.8)};

    const TruncationResult res = truncate(path, level);
    CHECK(res.tau == doctest::Approx(0.75).epsilon(1e-15));
    const std::vector<double> expect{0.0, 0.2, 0.5, 0.5, 0.5};
    for (std::size_t i = 0; i <= 4; ++i)
        CHECK(res.path.values()[i] == doctest::Approx(expect[i]).epsilon(1e-15));

    // A generous radius leaves the path untouched.
    const TruncationResult loose = truncate(path, {10.0, HolderExponent(0.8)});
    CHECK(loose.tau == grid.horizon());
    CHECK(loose.path.values() == path.values());

    // Radius zero stops at the first move away from zero.
    const TruncationResult zero = truncate(path, {0.0, HolderExponent(0.8)});
    CHECK(zero.tau == doctest::Approx(grid.dt()).epsilon(1e-15));
    for (double v : zero.path.values()) CHECK(v == 0.0);

    CHECK_THROWS_AS(truncate(path, {-1.0, HolderExponent(0.8)}), DomainError);
}

TEST_CASE("truncated fbm sample respects the level") {
    const TimeGrid grid(1.0, 64);
    const SampledPath b = sample_fbm(FbmConfig{0.75, grid, 7, FbmMethod::cholesky});
    const HolderExponent beta(0.55);
    const double T = grid.horizon();
    const double big = std::max(sup_norm(b, 0.0, T), holder_norm(b, 0.0, T, beta));

    // A radius below the path's own norms forces an early freeze...
    const double radius = 0.5 * big;
    const TruncationResult res = truncate(b, {radius, beta});
    CHECK(res.tau < T);
    CHECK(sup_norm(res.path, 0.0, T) <= radius + 1e-12);
    CHECK(holder_norm(res.path, 0.0, T, beta) <= 2.0 * radius + 1e-12);
    const std::size_t stop = grid.index_of(res.tau);
    for (std::size_t i = 0; i < stop; ++i)
        CHECK(res.path.values()[i] == b.values()[i]);
    CHECK(res.path.values()[stop] == res.path.values()[stop - 1]);

    // ...and a radius above them is never triggered.
    const TruncationResult none = truncate(b, {1.01 * big, beta});
    CHECK(none.tau == grid.horizon());
    CHECK(none.path.values() == b.values());
}
