#include "fracsde/fbm.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "fracsde/rng.hpp"

namespace fracsde {

namespace {

void check_hurst(double hurst) {
    if (!(hurst > 0.5) || !(hurst < 1.0))
        throw DomainError("fbm: Hurst index must lie in (1/2, 1)");
}

// k^(2H) for k = 0..n, the only powers the covariance algebra needs on a
// unit-spacing grid. Physical spacing enters later as the factor dt^H.
std::vector<double> unit_powers(double hurst, std::size_t n) {
    std::vector<double> p(n + 1);
    for (std::size_t k = 0; k <= n; ++k)
        p[k] = std::pow(static_cast<double>(k), 2.0 * hurst);
    return p;
}

// ------------------------------------------------------------------------
// Per-(H, N) setup caches. The first caller computes the setup outside the
// lock while later callers wait on a shared future; a failed computation is
// evicted so a retry is possible.

template <class Setup>
class SetupCache {
public:
    template <class Make>
    std::shared_ptr<const Setup> get(double hurst, std::size_t n, Make&& make) {
        const Key key{hurst, n};
        std::shared_future<std::shared_ptr<const Setup>> fut;
        std::promise<std::shared_ptr<const Setup>> prom;
        bool owner = false;
        {
            std::lock_guard<std::mutex> lock(mu_);
            auto it = entries_.find(key);
            if (it != entries_.end()) {
                fut = it->second;
            } else {
                fut = prom.get_future().share();
                entries_.emplace(key, fut);
                owner = true;
            }
        }
        if (owner) {
            try {
                prom.set_value(make());
            } catch (...) {
                prom.set_exception(std::current_exception());
                std::lock_guard<std::mutex> lock(mu_);
                entries_.erase(key);
            }
        }
        return fut.get();
    }

private:
    using Key = std::pair<double, std::size_t>;
    std::mutex mu_;
    std::map<Key, std::shared_future<std::shared_ptr<const Setup>>> entries_;
};

// ------------------------------------------------------------------------
// FFT helper. The FFTW planner has global state and is not thread-safe;
// plan handling is serialized while execution runs unlocked. FFTW_ESTIMATE
// keeps planning cheap and, unlike the measuring modes, always picks the
// same algorithm, which the bit-reproducibility contract needs.

std::mutex fftw_planner_mutex;

std::vector<std::complex<double>> dft_forward(const std::vector<std::complex<double>>& in) {
    const std::size_t m = in.size();
    fftw_complex* a = fftw_alloc_complex(m);
    fftw_complex* b = fftw_alloc_complex(m);
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex);
        plan = fftw_plan_dft_1d(static_cast<int>(m), a, b, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    for (std::size_t i = 0; i < m; ++i) {
        a[i][0] = in[i].real();
        a[i][1] = in[i].imag();
    }
    fftw_execute(plan);
    std::vector<std::complex<double>> out(m);
    for (std::size_t i = 0; i < m; ++i) out[i] = {b[i][0], b[i][1]};
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex);
        fftw_destroy_plan(plan);
    }
    fftw_free(a);
    fftw_free(b);
    return out;
}

// ------------------------------------------------------------------------
// Cholesky route: factor the unit-spacing node covariance
//   C_ij = (i^2H + j^2H - |i-j|^2H) / 2,  i,j = 1..N,
// into L L^T, packed lower-triangular row-major.

struct CholeskySetup {
    std::vector<double> lower; // row i starts at i(i+1)/2
    std::size_t n;
};

SetupCache<CholeskySetup> cholesky_cache;

std::shared_ptr<const CholeskySetup> make_cholesky(double hurst, std::size_t n) {
    const std::vector<double> p = unit_powers(hurst, n);
    auto setup = std::make_shared<CholeskySetup>();
    setup->n = n;
    auto& low = setup->lower;
    low.assign(n * (n + 1) / 2, 0.0);

    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t ri = i * (i + 1) / 2;
        for (std::size_t j = 0; j <= i; ++j) {
            const std::size_t rj = j * (j + 1) / 2;
            double s = 0.5 * (p[i + 1] + p[j + 1] - p[i - j]);
            for (std::size_t k = 0; k < j; ++k) s -= low[ri + k] * low[rj + k];
            if (j == i) {
                if (!(s > 0.0) || !std::isfinite(s))
                    throw FactorizationError(
                        "fbm covariance is numerically not positive definite at pivot " +
                            std::to_string(i + 1) + " of " + std::to_string(n) +
                            " (H = " + std::to_string(hurst) + ")",
                        i + 1);
                low[ri + i] = std::sqrt(s);
            } else {
                low[ri + j] = s / low[rj + j];
            }
        }
    }
    return setup;
}

// ------------------------------------------------------------------------
// Circulant route (increment embedding). The unit-spacing increment
// autocovariance c(k) = (|k+1|^2H - 2|k|^2H + |k-1|^2H)/2 is embedded into
// the first row of a 2N circulant whose eigenvalues come from one DFT.
// Nonnegativity of the eigenvalues is exactly positive-semidefiniteness of
// the embedding; a materially negative eigenvalue aborts setup.

struct CirculantSetup {
    std::vector<double> amplitude; // per-frequency std dev of the spectral draw
    std::size_t m;                 // embedding size 2N
};

SetupCache<CirculantSetup> circulant_cache;

std::shared_ptr<const CirculantSetup> make_circulant(double hurst, std::size_t n) {
    const std::size_t m = 2 * n;
    const std::vector<double> p = unit_powers(hurst, n + 1);
    auto cov = [&](std::size_t k) {
        if (k == 0) return 1.0;
        return 0.5 * (p[k + 1] - 2.0 * p[k] + p[k - 1]);
    };

    std::vector<std::complex<double>> row(m);
    for (std::size_t k = 0; k <= n; ++k) row[k] = cov(k);
    for (std::size_t k = 1; k < n; ++k) row[m - k] = cov(k);

    const auto eig = dft_forward(row);
    double max_eig = 0.0;
    for (const auto& e : eig) max_eig = std::max(max_eig, e.real());
    auto setup = std::make_shared<CirculantSetup>();
    setup->m = m;
    setup->amplitude.resize(m / 2 + 1);
    for (std::size_t k = 0; k <= m / 2; ++k) {
        double lambda = eig[k].real();
        if (lambda < -1e-9 * max_eig)
            throw FactorizationError("circulant embedding of the fbm increments is not "
                                     "positive semidefinite at eigenvalue " +
                                         std::to_string(k) + " (H = " + std::to_string(hurst) +
                                         ")",
                                     k);
        lambda = std::max(lambda, 0.0);
        const bool real_mode = (k == 0 || k == m / 2);
        setup->amplitude[k] =
            std::sqrt(lambda / static_cast<double>(real_mode ? m : 2 * m));
    }
    return setup;
}

std::vector<double> circulant_increments(const CirculantSetup& setup, std::size_t n,
                                         std::uint64_t seed) {
    const std::size_t m = setup.m;
    SplitMix64 rng(seed);

    // Fixed draw order: the two real modes first, then one normal pair per
    // conjugate frequency pair. Total draws: 2N, independent of anything
    // but N, so seeds stay aligned across methods of consumption.
    std::vector<std::complex<double>> spectral(m);
    double g0, g1;
    rng.next_normal_pair(g0, g1);
    spectral[0] = setup.amplitude[0] * g0;
    spectral[m / 2] = setup.amplitude[m / 2] * g1;
    for (std::size_t k = 1; k < m / 2; ++k) {
        double a, b;
        rng.next_normal_pair(a, b);
        spectral[k] = setup.amplitude[k] * std::complex<double>(a, b);
        spectral[m - k] = setup.amplitude[k] * std::complex<double>(a, -b);
    }

    const auto x = dft_forward(spectral);
    std::vector<double> inc(n);
    for (std::size_t j = 0; j < n; ++j) inc[j] = x[j].real();
    return inc;
}

} // namespace

double fbm_covariance(double hurst, double t, double s) {
    check_hurst(hurst);
    if (t < 0.0 || s < 0.0 || !std::isfinite(t) || !std::isfinite(s))
        throw DomainError("fbm_covariance: times must be nonnegative");
    const double h2 = 2.0 * hurst;
    return 0.5 * (std::pow(t, h2) + std::pow(s, h2) - std::pow(std::abs(t - s), h2));
}

SampledPath sample_fbm(const FbmConfig& config) {
    check_hurst(config.hurst);
    const std::size_t n = config.grid.n_steps();
    const double scale = std::pow(config.grid.dt(), config.hurst);
    std::vector<double> values(n + 1, 0.0);

    if (config.method == FbmMethod::cholesky) {
        auto setup = cholesky_cache.get(config.hurst, n, [&] {
            return make_cholesky(config.hurst, n);
        });
        SplitMix64 rng(config.seed);
        const std::vector<double> xi = rng.normals(n);
        const auto& low = setup->lower;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t ri = i * (i + 1) / 2;
            double s = 0.0;
            for (std::size_t j = 0; j <= i; ++j) s += low[ri + j] * xi[j];
            values[i + 1] = scale * s;
        }
    } else {
        auto setup = circulant_cache.get(config.hurst, n, [&] {
            return make_circulant(config.hurst, n);
        });
        const std::vector<double> inc = circulant_increments(*setup, n, config.seed);
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            acc += scale * inc[i];
            values[i + 1] = acc;
        }
    }
    return SampledPath(config.grid, std::move(values));
}

TruncationResult truncate(const SampledPath& path, const TruncationLevel& level) {
    if (!(level.radius >= 0.0) || !std::isfinite(level.radius))
        throw DomainError("truncate: radius must be nonnegative");
    const TimeGrid& g = path.grid();
    const std::vector<double>& v = path.values();
    const std::size_t n = g.n_steps();
    const double beta = level.beta.beta();

    std::vector<double> inv_gap_pow(n + 1, 0.0);
    for (std::size_t gap = 1; gap <= n; ++gap)
        inv_gap_pow[gap] = 1.0 / std::pow(static_cast<double>(gap) * g.dt(), beta);

    // Walk left to right, growing the prefix Holder norm one node at a time,
    // and stop at the first node that breaks either constraint.
    double holder = 0.0;
    std::size_t stop = n + 1; // first violating node, n+1 = none
    if (std::abs(v[0]) > level.radius) {
        stop = 0;
    } else {
        for (std::size_t i = 1; i <= n; ++i) {
            for (std::size_t j = 0; j < i; ++j)
                holder = std::max(holder, std::abs(v[i] - v[j]) * inv_gap_pow[i - j]);
            if (std::abs(v[i]) > level.radius || holder > level.radius) {
                stop = i;
                break;
            }
        }
    }

    if (stop > n) return {SampledPath(g, v), g.horizon()};

    std::vector<double> out(v.begin(), v.end());
    const double frozen = stop == 0 ? v[0] : v[stop - 1];
    for (std::size_t i = stop; i <= n; ++i) out[i] = frozen;
    return {SampledPath(g, std::move(out)), g.node(stop)};
}

} // namespace fracsde
