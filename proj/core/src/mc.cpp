#include "fracsde/mc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

#include "fracsde/errors.hpp"
#include "fracsde/fbm.hpp"

#include "shift_density.hpp"

namespace fracsde {

namespace {

std::size_t worker_count(std::size_t n_samples) {
    std::size_t budget = std::thread::hardware_concurrency();
    if (budget == 0) budget = 1;
    if (const char* env = std::getenv("FRACSDE_THREADS")) {
        char* tail = nullptr;
        const long v = std::strtol(env, &tail, 10);
        if (tail == env || *tail != '\0' || v < 1)
            throw DomainError("FRACSDE_THREADS must be a positive integer");
        budget = static_cast<std::size_t>(v);
    }
    return std::max<std::size_t>(1, std::min(budget, n_samples));
}

void validate_plan(const McPlan& plan, bool target_used) {
    if (plan.n_samples < 100)
        throw DomainError("Monte Carlo plans need at least 100 samples");
    if (target_used && !std::isfinite(plan.target))
        throw DomainError("Monte Carlo target must be finite");
    if (plan.tolerance.kind == TolerancePolicy::Kind::absolute &&
        (!(plan.tolerance.value > 0.0) || !std::isfinite(plan.tolerance.value)))
        throw DomainError("absolute tolerance must be a positive finite value");
}

// Map the experiment over base + [0, n) with the index range partitioned
// into contiguous per-worker chunks. Worker exceptions are parked and
// re-thrown here in worker order, so the caller sees the lowest-range one.
std::vector<double> fill_samples(std::size_t n, std::uint64_t base,
                                 const std::function<double(std::uint64_t)>& experiment) {
    std::vector<double> values(n);
    const std::size_t workers = worker_count(n);
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) values[i] = experiment(base + i);
        return values;
    }
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::exception_ptr> failures(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&values, &failures, &experiment, base, chunk, n, w] {
            const std::size_t lo = w * chunk;
            const std::size_t hi = std::min(n, lo + chunk);
            try {
                for (std::size_t i = lo; i < hi; ++i) values[i] = experiment(base + i);
            } catch (...) {
                failures[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (const auto& f : failures)
        if (f) std::rethrow_exception(f);
    return values;
}

struct Reduction {
    double mean = 0.0;
    std::size_t used = 0;
    std::size_t bad = 0;
};

// Neumaier-compensated mean over the finite entries, walked in index order
// regardless of how many workers produced them.
Reduction reduce_mean(const std::vector<double>& values) {
    Reduction r;
    double sum = 0.0, comp = 0.0;
    for (double v : values) {
        if (!std::isfinite(v)) {
            ++r.bad;
            continue;
        }
        ++r.used;
        const double t = sum + v;
        comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
        sum = t;
    }
    if (r.bad * 100 > values.size()) {
        char msg[128];
        std::snprintf(msg, sizeof msg,
                      "%zu of %zu samples were non-finite, over the 1%% exclusion cap",
                      r.bad, values.size());
        throw NumericalError(msg);
    }
    r.mean = (sum + comp) / static_cast<double>(r.used);
    return r;
}

// Central moment of the finite entries; k = 2 or 4 here.
double central_moment(const std::vector<double>& values, double mean, int k,
                      std::size_t used) {
    double sum = 0.0, comp = 0.0;
    for (double v : values) {
        if (!std::isfinite(v)) continue;
        double p = (v - mean) * (v - mean);
        if (k == 4) p *= p;
        const double t = sum + p;
        comp += std::abs(sum) >= std::abs(p) ? (sum - t) + p : (p - t) + sum;
        sum = t;
    }
    return (sum + comp) / static_cast<double>(used);
}

bool graded_pass(double deviation, double std_error, const TolerancePolicy& tol) {
    if (tol.kind == TolerancePolicy::Kind::absolute) return deviation <= tol.value;
    return deviation <= 3.0 * std_error;
}

} // namespace

McResult run_mc(const McPlan& plan, const std::function<double(std::uint64_t)>& experiment) {
    validate_plan(plan, true);
    if (!experiment) throw DomainError("run_mc needs an experiment");

    const std::vector<double> values =
        fill_samples(plan.n_samples, plan.base_seed, experiment);
    const Reduction r = reduce_mean(values);
    const double m2 = central_moment(values, r.mean, 2, r.used);
    const double var = m2 * static_cast<double>(r.used) / (static_cast<double>(r.used) - 1.0);

    McResult out;
    out.mean = r.mean;
    out.std_error = std::sqrt(var / static_cast<double>(r.used));
    out.target = plan.target;
    out.pass = graded_pass(std::abs(r.mean - plan.target), out.std_error, plan.tolerance);
    out.n_used = r.used;
    out.n_non_finite = r.bad;
    return out;
}

VarianceResult variance_check(const McPlan& plan, const IntegrandSpec& f,
                              const Kernel& phi) {
    validate_plan(plan, false); // the target comes from quadrature, not the plan
    if (f.malliavin.form() != MalliavinKernel::Form::missing &&
        f.malliavin.form() != MalliavinKernel::Form::zero)
        throw DomainError("variance_check needs a deterministic integrand");
    if (!f.values.all_finite())
        throw DomainError("integrand samples must be finite");

    // int int phi(u, v) f(u) f(v) du dv = 2 int f(s) [int_0^s phi(s, v) f(v) dv] ds
    const TimeGrid& grid = f.values.grid();
    const std::vector<double> inner =
        detail::kernel_weighted_prefix(f.values.values(), phi, grid);
    double target = 0.0;
    for (std::size_t i = 0; i < grid.n_steps(); ++i)
        target += 0.5 *
                  (f.values.values()[i] * inner[i] +
                   f.values.values()[i + 1] * inner[i + 1]) *
                  grid.dt();
    target *= 2.0;

    const FbmMethod method =
        grid.n_steps() > 1024 ? FbmMethod::circulant : FbmMethod::cholesky;
    const double horizon = grid.horizon();
    const auto one_integral = [&f, &phi, &grid, method, horizon](std::uint64_t seed) {
        const SampledPath B = sample_fbm(FbmConfig{phi.hurst(), grid, seed, method});
        return young_riemann(f, B, 0.0, horizon, EvalPoint::mid);
    };
    const std::vector<double> values =
        fill_samples(plan.n_samples, plan.base_seed, one_integral);
    const Reduction r = reduce_mean(values);
    const double m2 = central_moment(values, r.mean, 2, r.used);
    const double m4 = central_moment(values, r.mean, 4, r.used);

    VarianceResult out;
    out.sample_var = m2 * static_cast<double>(r.used) / (static_cast<double>(r.used) - 1.0);
    out.std_error = std::sqrt(std::max(0.0, m4 - m2 * m2) / static_cast<double>(r.used));
    out.target = target;
    out.pass = graded_pass(std::abs(out.sample_var - target), out.std_error, plan.tolerance);
    out.n_used = r.used;
    out.n_non_finite = r.bad;
    return out;
}

} // namespace fracsde
