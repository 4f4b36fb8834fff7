#include "fracsde/frac_calc.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace fracsde {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_finite(const SampledPath& f, const char* who) {
    if (!f.all_finite()) throw DomainError(std::string(who) + ": input path must be finite");
}

// Scale comparison of the grid Holder quotient sup |f_i - f_j| / (gap*dt)^alpha:
// restricted to a coarse subgrid it can only shrink, and for f Holder-beta with
// beta > alpha the two agree up to noise, while beta < alpha makes the full-grid
// value blow up like dt^(beta-alpha). Flags only clear violations.
void check_smoothness(const SampledPath& f, std::size_t i0, std::size_t i1, double alpha,
                      const char* who) {
    const std::size_t n = i1 - i0;
    if (n < 32) return;
    std::size_t stride = 1;
    while (n / (2 * stride) >= 8) stride *= 2;

    const std::vector<double>& v = f.values();
    const double dt = f.grid().dt();
    std::vector<double> inv_gap_pow(n + 1, 0.0);
    for (std::size_t gap = 1; gap <= n; ++gap)
        inv_gap_pow[gap] = 1.0 / std::pow(static_cast<double>(gap) * dt, alpha);

    double full = 0.0;
    for (std::size_t i = i0; i < i1; ++i)
        for (std::size_t j = i + 1; j <= i1; ++j)
            full = std::max(full, std::abs(v[j] - v[i]) * inv_gap_pow[j - i]);

    double coarse = 0.0;
    for (std::size_t i = i0; i < i1; i += stride)
        for (std::size_t j = i + stride; j <= i1; j += stride)
            coarse = std::max(coarse, std::abs(v[j] - v[i]) * inv_gap_pow[j - i]);

    if (full > 2.0 * coarse && coarse > 0.0)
        throw DomainError(std::string(who) + ": path looks rougher than Holder order " +
                          std::to_string(alpha) +
                          " (fine-scale Holder quotient exceeds twice the coarse-scale one)");
}

} // namespace

FracOrder::FracOrder(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0) || !(alpha < 1.0) || !std::isfinite(alpha))
        throw DomainError("FracOrder: alpha must lie in (0, 1)");
}

SampledPath frac_integral_left(const SampledPath& f, FracOrder order, double a) {
    check_finite(f, "frac_integral_left");
    const TimeGrid& g = f.grid();
    const std::size_t ia = g.index_of(a);
    const std::size_t n = g.n_steps();
    const double alpha = order.alpha();
    const double dt = g.dt();
    const double dt_alpha = std::pow(dt, alpha);
    const double inv_gamma = 1.0 / std::tgamma(alpha);

    // Closed-form moments of the kernel (t-s)^(alpha-1) over one cell at
    // gap m = (t - s_cell)/dt:  A(m) pairs with the left node value, B(m)
    // with the rise across the cell, so that the cell contribution is
    // f_j * A + (f_{j+1} - f_j) * B, exact for linear f.
    const std::size_t span = n - ia;
    std::vector<double> pow_a(span + 1), pow_a1(span + 1);
    for (std::size_t m = 0; m <= span; ++m) {
        pow_a[m] = std::pow(static_cast<double>(m), alpha);
        pow_a1[m] = std::pow(static_cast<double>(m), alpha + 1.0);
    }
    std::vector<double> wa(span + 1, 0.0), wb(span + 1, 0.0);
    for (std::size_t m = 1; m <= span; ++m) {
        const double p1 = (pow_a[m] - pow_a[m - 1]) / alpha;
        const double p2 = (pow_a1[m] - pow_a1[m - 1]) / (alpha + 1.0);
        wa[m] = dt_alpha * p1;
        wb[m] = dt_alpha * (static_cast<double>(m) * p1 - p2);
    }

    const std::vector<double>& v = f.values();
    std::vector<double> out(n + 1, kNaN);
    out[ia] = 0.0;
    for (std::size_t i = ia + 1; i <= n; ++i) {
        double acc = 0.0;
        for (std::size_t j = ia; j < i; ++j) {
            const std::size_t m = i - j;
            acc += v[j] * wa[m] + (v[j + 1] - v[j]) * wb[m];
        }
        out[i] = inv_gamma * acc;
    }
    return SampledPath(g, std::move(out));
}

SampledPath weyl_derivative_left(const SampledPath& f, FracOrder order, double a) {
    check_finite(f, "weyl_derivative_left");
    const TimeGrid& g = f.grid();
    const std::size_t ia = g.index_of(a);
    const std::size_t n = g.n_steps();
    const double alpha = order.alpha();
    const double dt = g.dt();
    check_smoothness(f, ia, n, alpha, "weyl_derivative_left");

    const double inv_gamma = 1.0 / std::tgamma(1.0 - alpha);
    const std::size_t span = n - ia;

    // Cell moments of (t-s)^(-alpha-1) against the linear interpolant of
    // f(t) - f(s). At gap 1 the plain kernel integral diverges, but there the
    // difference vanishes linearly at s = t, and the combined moment is finite.
    std::vector<double> pow_ma(span + 1), pow_m1a(span + 1);
    for (std::size_t m = 0; m <= span; ++m) {
        pow_ma[m] = std::pow(static_cast<double>(m), -alpha);
        pow_m1a[m] = std::pow(static_cast<double>(m), 1.0 - alpha);
    }
    // q1(m) = int u^(-a-1), q2(m) = int u^(-a) over [(m-1)dt, m dt], unscaled by dt^-a.
    std::vector<double> q1(span + 1, 0.0), q2(span + 1, 0.0);
    for (std::size_t m = 1; m <= span; ++m) {
        if (m > 1) q1[m] = (pow_ma[m - 1] - pow_ma[m]) / alpha;
        q2[m] = (pow_m1a[m] - pow_m1a[m - 1]) / (1.0 - alpha);
    }

    const double dt_ma = std::pow(dt, -alpha);
    const std::vector<double>& v = f.values();
    std::vector<double> out(n + 1, kNaN);
    out[ia] = v[ia] == 0.0 ? 0.0 : kNaN;
    for (std::size_t i = ia + 1; i <= n; ++i) {
        const double fi = v[i];
        // Nearest cell: difference term only, the kernel term's weight vanishes there.
        double acc = (fi - v[i - 1]) * q2[1];
        for (std::size_t j = ia; j + 1 < i; ++j) {
            const std::size_t m = i - j;
            const double hj = fi - v[j];       // difference at the far cell edge
            const double hj1 = fi - v[j + 1];  // and at the near one
            acc += hj1 * q1[m] + (hj - hj1) * (q2[m] - static_cast<double>(m - 1) * q1[m]);
        }
        const double t_a = static_cast<double>(i - ia) * dt;
        out[i] = inv_gamma * (fi / std::pow(t_a, alpha) + alpha * dt_ma * acc);
    }
    return SampledPath(g, std::move(out));
}

SampledPath weyl_derivative_right(const SampledPath& f, FracOrder order, double b) {
    check_finite(f, "weyl_derivative_right");
    const TimeGrid& g = f.grid();
    const std::size_t ib = g.index_of(b);
    const std::size_t n = g.n_steps();
    const double alpha = order.alpha();
    const double dt = g.dt();
    check_smoothness(f, 0, ib, alpha, "weyl_derivative_right");

    const double inv_gamma = 1.0 / std::tgamma(1.0 - alpha);
    const std::size_t span = ib;

    std::vector<double> pow_ma(span + 1), pow_m1a(span + 1);
    for (std::size_t m = 0; m <= span; ++m) {
        pow_ma[m] = std::pow(static_cast<double>(m), -alpha);
        pow_m1a[m] = std::pow(static_cast<double>(m), 1.0 - alpha);
    }
    std::vector<double> q1(span + 1, 0.0), q2(span + 1, 0.0);
    for (std::size_t m = 1; m <= span; ++m) {
        if (m > 1) q1[m] = (pow_ma[m - 1] - pow_ma[m]) / alpha;
        q2[m] = (pow_m1a[m] - pow_m1a[m - 1]) / (1.0 - alpha);
    }

    const double dt_ma = std::pow(dt, -alpha);
    const std::vector<double>& v = f.values();
    std::vector<double> out(n + 1, kNaN);
    out[ib] = v[ib] == 0.0 ? 0.0 : kNaN;
    for (std::size_t i = 0; i < ib; ++i) {
        const double fi = v[i];
        double acc = (fi - v[i + 1]) * q2[1];
        for (std::size_t j = i + 1; j < ib; ++j) {
            const std::size_t m = j + 1 - i;
            const double hj = fi - v[j + 1];   // far edge of the cell [t_j, t_j+1]
            const double hnear = fi - v[j];
            acc += hnear * q1[m] + (hj - hnear) * (q2[m] - static_cast<double>(m - 1) * q1[m]);
        }
        const double b_t = static_cast<double>(ib - i) * dt;
        out[i] = inv_gamma * (fi / std::pow(b_t, alpha) + alpha * dt_ma * acc);
    }
    return SampledPath(g, std::move(out));
}

} // namespace fracsde
