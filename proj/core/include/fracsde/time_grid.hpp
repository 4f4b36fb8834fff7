#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "fracsde/errors.hpp"

// Uniform time grids, paths sampled on them, Holder and sup norms over
// subintervals, and closed-form integrals of the covariance density
//
//     phi(u,v) = H(2H-1)|u-v|^(2H-2),   1/2 < H < 1,
//
// which is weakly singular on the diagonal. Everything downstream works on
// these types. All of them are immutable after construction and safe to
// share across threads; the free functions are pure.

namespace fracsde {

// Uniform partition of [0, T] into n_steps cells of width dt = T/n_steps.
class TimeGrid {
public:
    TimeGrid(double horizon, std::size_t n_steps);

    double horizon() const noexcept { return horizon_; }
    std::size_t n_steps() const noexcept { return n_steps_; }
    std::size_t n_nodes() const noexcept { return n_steps_ + 1; }
    double dt() const noexcept { return dt_; }

    // node(0) = 0, node(n_steps) = horizon exactly, strictly increasing.
    double node(std::size_t i) const noexcept {
        return i == n_steps_ ? horizon_ : static_cast<double>(i) * dt_;
    }

    // Index of the node equal to t (within rounding slack of one part in
    // 1e9 of a cell). Off-grid t is a contract violation.
    std::size_t index_of(double t) const;
    bool contains_time(double t) const noexcept;

    bool operator==(const TimeGrid& other) const noexcept {
        return horizon_ == other.horizon_ && n_steps_ == other.n_steps_;
    }

private:
    double horizon_;
    std::size_t n_steps_;
    double dt_;
};

// Real-valued function sampled at the nodes of a grid. This is the concrete
// representation of driving paths, solutions, densities and integrands.
//
// Paths produced by sampling and solving are finite everywhere. Fractional
// derivative operations may place a quiet-NaN sentinel at their degenerate
// endpoint node; they document that, and all_finite() lets callers check.
class SampledPath {
public:
    SampledPath(TimeGrid grid, std::vector<double> values);

    static SampledPath zero(const TimeGrid& grid);

    template <class F>
    static SampledPath from_function(const TimeGrid& grid, F&& f) {
        std::vector<double> v(grid.n_nodes());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid.node(i));
        return SampledPath(grid, std::move(v));
    }

    const TimeGrid& grid() const noexcept { return grid_; }
    const std::vector<double>& values() const noexcept { return values_; }
    double operator[](std::size_t i) const noexcept { return values_[i]; }
    std::size_t size() const noexcept { return values_.size(); }

    // Value at an on-grid time; throws DomainError for off-grid t.
    double value_at(double t) const { return values_[grid_.index_of(t)]; }

    bool all_finite() const noexcept;

private:
    TimeGrid grid_;
    std::vector<double> values_;
};

// Holder exponent used jointly with a driving path of Hurst index H, in
// which case beta must lie in (1/2, H). The type admits (1/2, 1] so that
// smooth test paths (beta = 1) can be measured too.
class HolderExponent {
public:
    explicit HolderExponent(double beta);
    double beta() const noexcept { return beta_; }

private:
    double beta_;
};

// The covariance density phi of fractional Brownian motion with Hurst index
// H in (1/2, 1). phi itself blows up on the diagonal; library code only ever
// integrates it through the closed-form antiderivatives below.
class Kernel {
public:
    explicit Kernel(double hurst);
    double hurst() const noexcept { return hurst_; }

    // phi(u,v) = H(2H-1)|u-v|^(2H-2); +inf on the diagonal. Exposed for
    // tests and for quadratures that stay away from u = v.
    double density(double u, double v) const;

private:
    double hurst_;
};

// Exact discrete Holder norm over the grid nodes of [a, b]:
//
//     max over node pairs s < t in [a,b] of |x(t)-x(s)| / (t-s)^beta.
//
// Cost is O(M^2) in the number of nodes spanned; exactness matters because
// contraction step-size rules consume these norms. The raw-exponent
// overload accepts any exponent in (0, 1] (fractional calculus heuristics
// need exponents below 1/2).
double holder_norm(const SampledPath& path, double a, double b, const HolderExponent& beta);
double holder_norm(const SampledPath& path, double a, double b, double exponent);

// O(M log M) lower estimate restricted to dyadic node gaps (1, 2, 4, ...).
// An approximation, never larger than holder_norm.
double holder_norm_dyadic(const SampledPath& path, double a, double b,
                          const HolderExponent& beta);

// max |x(t)| over the grid nodes of [a, b].
double sup_norm(const SampledPath& path, double a, double b);

// Integral of the kernel in one argument, by antiderivative:
//
//     int_0^t phi(s,u) du = H [ s^(2H-1) + (t-s)^(2H-1) ]   for t >= s,
//                           H [ s^(2H-1) - (s-t)^(2H-1) ]   for t <  s.
//
// Negative s or t is a domain error.
double kernel_partial_integral(const Kernel& kernel, double s, double t);

// int_0^t int_0^t phi(u,v) du dv = t^(2H), the variance of the driving
// process at time t.
double kernel_double_integral(const Kernel& kernel, double t);

} // namespace fracsde
