#include "fracsde/time_grid.hpp"

#include <cmath>
#include <string>

namespace fracsde {

namespace {

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", x);
    return buf;
}

} // namespace

TimeGrid::TimeGrid(double horizon, std::size_t n_steps)
    : horizon_(horizon), n_steps_(n_steps), dt_(horizon / static_cast<double>(n_steps)) {
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw DomainError("TimeGrid: horizon must be positive and finite, got " + fmt(horizon));
    if (n_steps == 0) throw DomainError("TimeGrid: n_steps must be at least 1");
}

std::size_t TimeGrid::index_of(double t) const {
    if (!std::isfinite(t) || t < -0.5 * dt_ || t > horizon_ + 0.5 * dt_)
        throw DomainError("TimeGrid: time " + fmt(t) + " outside [0, " + fmt(horizon_) + "]");
    const double r = t / dt_;
    const auto i = static_cast<std::size_t>(std::llround(r));
    const double tol = 1e-9 * std::max(dt_, std::abs(t));
    if (i > n_steps_ || std::abs(t - node(i)) > tol)
        throw DomainError("TimeGrid: time " + fmt(t) + " is not a grid node (dt = " +
                          fmt(dt_) + ")");
    return i;
}

bool TimeGrid::contains_time(double t) const noexcept {
    if (!std::isfinite(t) || t < -0.5 * dt_ || t > horizon_ + 0.5 * dt_) return false;
    const auto i = static_cast<std::size_t>(std::llround(t / dt_));
    return i <= n_steps_ && std::abs(t - node(i)) <= 1e-9 * std::max(dt_, std::abs(t));
}

SampledPath::SampledPath(TimeGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.n_nodes())
        throw DomainError("SampledPath: " + std::to_string(values_.size()) +
                          " values for a grid of " + std::to_string(grid_.n_nodes()) +
                          " nodes");
}

SampledPath SampledPath::zero(const TimeGrid& grid) {
    return SampledPath(grid, std::vector<double>(grid.n_nodes(), 0.0));
}

bool SampledPath::all_finite() const noexcept {
    for (double v : values_)
        if (!std::isfinite(v)) return false;
    return true;
}

HolderExponent::HolderExponent(double beta) : beta_(beta) {
    if (!(beta > 0.5) || !(beta <= 1.0))
        throw DomainError("HolderExponent: beta must lie in (1/2, 1], got " + fmt(beta));
}

Kernel::Kernel(double hurst) : hurst_(hurst) {
    if (!(hurst > 0.5) || !(hurst < 1.0))
        throw DomainError("Kernel: Hurst index must lie in (1/2, 1), got " + fmt(hurst));
}

double Kernel::density(double u, double v) const {
    const double h = hurst_;
    return h * (2.0 * h - 1.0) * std::pow(std::abs(u - v), 2.0 * h - 2.0);
}

namespace {

double holder_norm_impl(const SampledPath& path, double a, double b, double exponent) {
    const TimeGrid& g = path.grid();
    if (!(a < b)) throw DomainError("holder_norm: need a < b");
    const std::size_t ia = g.index_of(a);
    const std::size_t ib = g.index_of(b);

    // Precomputed gap powers keep the O(M^2) pair scan free of pow() calls.
    const std::size_t m = ib - ia;
    std::vector<double> inv_gap_pow(m + 1);
    for (std::size_t gap = 1; gap <= m; ++gap)
        inv_gap_pow[gap] = 1.0 / std::pow(static_cast<double>(gap) * g.dt(), exponent);

    const std::vector<double>& v = path.values();
    double best = 0.0;
    for (std::size_t i = ia; i < ib; ++i) {
        for (std::size_t j = i + 1; j <= ib; ++j) {
            const double r = std::abs(v[j] - v[i]) * inv_gap_pow[j - i];
            if (r > best) best = r;
        }
    }
    return best;
}

} // namespace

double holder_norm(const SampledPath& path, double a, double b, const HolderExponent& beta) {
    return holder_norm_impl(path, a, b, beta.beta());
}

double holder_norm(const SampledPath& path, double a, double b, double exponent) {
    if (!(exponent > 0.0) || !(exponent <= 1.0))
        throw DomainError("holder_norm: exponent must lie in (0, 1], got " + fmt(exponent));
    return holder_norm_impl(path, a, b, exponent);
}

double holder_norm_dyadic(const SampledPath& path, double a, double b,
                          const HolderExponent& beta) {
    const TimeGrid& g = path.grid();
    if (!(a < b)) throw DomainError("holder_norm_dyadic: need a < b");
    const std::size_t ia = g.index_of(a);
    const std::size_t ib = g.index_of(b);
    const std::vector<double>& v = path.values();

    double best = 0.0;
    for (std::size_t gap = 1; gap <= ib - ia; gap *= 2) {
        const double inv = 1.0 / std::pow(static_cast<double>(gap) * g.dt(), beta.beta());
        for (std::size_t i = ia; i + gap <= ib; ++i) {
            const double r = std::abs(v[i + gap] - v[i]) * inv;
            if (r > best) best = r;
        }
    }
    return best;
}

double sup_norm(const SampledPath& path, double a, double b) {
    const TimeGrid& g = path.grid();
    if (!(a <= b)) throw DomainError("sup_norm: need a <= b");
    const std::size_t ia = g.index_of(a);
    const std::size_t ib = g.index_of(b);
    double best = 0.0;
    for (std::size_t i = ia; i <= ib; ++i) best = std::max(best, std::abs(path[i]));
    return best;
}

double kernel_partial_integral(const Kernel& kernel, double s, double t) {
    if (s < 0.0 || t < 0.0 || !std::isfinite(s) || !std::isfinite(t))
        throw DomainError("kernel_partial_integral: times must be nonnegative");
    const double h = kernel.hurst();
    const double q = 2.0 * h - 1.0;
    if (t >= s) return h * (std::pow(s, q) + std::pow(t - s, q));
    return h * (std::pow(s, q) - std::pow(s - t, q));
}

double kernel_double_integral(const Kernel& kernel, double t) {
    if (t < 0.0 || !std::isfinite(t))
        throw DomainError("kernel_double_integral: time must be nonnegative");
    return std::pow(t, 2.0 * kernel.hurst());
}

} // namespace fracsde
