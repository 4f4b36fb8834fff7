#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

#include "fracsde/integrators.hpp"
#include "fracsde/time_grid.hpp"

// Monte Carlo harness. An experiment is a closure from a seed to one scalar
// sample; the harness maps it over consecutive seeds base_seed + index,
// reduces with compensated summation in index order, and grades the sample
// mean against a declared target.
//
// Sample evaluation fans out over threads (FRACSDE_THREADS sets the worker
// count; default is the hardware concurrency) by partitioning the index
// range, but the reduction always walks the sample array sequentially, so
// every statistic is bit-identical for any thread count.
//
// Non-finite samples are excluded from the statistics and counted; more
// than 1% of them is a hard failure, since that much exclusion would bias
// whatever remains.

namespace fracsde {

struct TolerancePolicy {
    enum class Kind { three_sigma, absolute };
    Kind kind = Kind::three_sigma;
    double value = 0.0; // only read for Kind::absolute

    static TolerancePolicy sigma_band() { return {}; }
    static TolerancePolicy within(double v) { return {Kind::absolute, v}; }
};

struct McPlan {
    std::size_t n_samples = 0; // at least 100
    std::uint64_t base_seed = 0;
    std::string estimator; // label carried into reports, never behavior
    double target = 0.0;
    TolerancePolicy tolerance;
};

struct McResult {
    double mean = 0.0;
    double std_error = 0.0;
    double target = 0.0;
    bool pass = false;
    std::size_t n_used = 0;       // finite samples in the statistics
    std::size_t n_non_finite = 0; // excluded and counted
};

// Evaluate experiment(base_seed + i) for i in [0, n_samples), then grade:
// pass means |mean - target| <= 3 std_error under the three_sigma policy,
// or <= the absolute value otherwise. Throws DomainError for malformed
// plans and NumericalError when more than 1% of samples are non-finite;
// exceptions from the experiment itself propagate unchanged.
McResult run_mc(const McPlan& plan, const std::function<double(std::uint64_t)>& experiment);

struct VarianceResult {
    double sample_var = 0.0;
    double std_error = 0.0; // of the variance estimator, from the 4th moment
    double target = 0.0;
    bool pass = false;
    std::size_t n_used = 0;
    std::size_t n_non_finite = 0;
};

// Isometry check for a deterministic integrand: per seed, sample a driver
// on f's grid with the kernel's Hurst index and integrate f against it
// (midpoint Riemann; for deterministic f the correction-free integral is
// the right one). The sample variance is graded against the double kernel
// integral int int phi(u, v) f(u) f(v) du dv, computed by symmetric
// quadrature with the kernel handled in closed form per cell.
//
// f must carry no Malliavin kernel (or the zero one); anything else means
// the integrand is not deterministic and the variance target would be
// missing its derivative term.
VarianceResult variance_check(const McPlan& plan, const IntegrandSpec& f,
                              const Kernel& phi);

} // namespace fracsde
