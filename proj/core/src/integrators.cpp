#include "fracsde/integrators.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "power_weights.hpp"

namespace fracsde {

namespace {

using detail::PowerWeights;
using detail::power_weights;

void require_same_grid(const TimeGrid& x, const TimeGrid& y, const char* who) {
    if (!(x == y)) throw DomainError(std::string(who) + ": paths live on different grids");
}

std::pair<std::size_t, std::size_t> window_indices(const TimeGrid& g, double a, double b,
                                                   const char* who) {
    const std::size_t ia = g.index_of(a);
    const std::size_t ib = g.index_of(b);
    if (ia >= ib) throw DomainError(std::string(who) + ": need a < b on the grid");
    return {ia, ib};
}

// The window [a,b] re-rooted at time 0 on its own grid; the fractional
// operators are shift invariant, so this loses nothing and keeps their
// sentinel and smoothness logic scoped to the window.
SampledPath window_path(const SampledPath& p, std::size_t ia, std::size_t ib) {
    const double dt = p.grid().dt();
    const TimeGrid sub(dt * static_cast<double>(ib - ia), ib - ia);
    std::vector<double> v(p.values().begin() + static_cast<std::ptrdiff_t>(ia),
                          p.values().begin() + static_cast<std::ptrdiff_t>(ib) + 1);
    return SampledPath(sub, std::move(v));
}

double trapezoid(const std::vector<double>& v, double dt, std::size_t i0, std::size_t i1) {
    double s = 0.0;
    for (std::size_t i = i0; i < i1; ++i) s += 0.5 * dt * (v[i] + v[i + 1]);
    return s;
}

} // namespace

MalliavinKernel MalliavinKernel::zero() {
    MalliavinKernel k;
    k.form_ = Form::zero;
    return k;
}

MalliavinKernel MalliavinKernel::indicator(std::function<double(double)> scale) {
    if (!scale) throw DomainError("MalliavinKernel::indicator: scale function required");
    MalliavinKernel k;
    k.form_ = Form::indicator;
    k.scale_ = std::move(scale);
    return k;
}

MalliavinKernel MalliavinKernel::general(std::function<double(double, double)> evaluator) {
    if (!evaluator) throw DomainError("MalliavinKernel::general: evaluator required");
    MalliavinKernel k;
    k.form_ = Form::general;
    k.evaluator_ = std::move(evaluator);
    return k;
}

double MalliavinKernel::evaluate(double s, double t) const {
    switch (form_) {
    case Form::zero: return 0.0;
    case Form::indicator: return s <= t ? scale_(t) : 0.0;
    case Form::general: return evaluator_(s, t);
    default: throw DomainError("MalliavinKernel: kernel was never provided");
    }
}

double MalliavinKernel::indicator_scale(double t) const {
    if (form_ != Form::indicator)
        throw DomainError("MalliavinKernel: not an indicator kernel");
    return scale_(t);
}

double young_riemann(const IntegrandSpec& f, const SampledPath& g, double a, double b,
                     EvalPoint point) {
    require_same_grid(f.values.grid(), g.grid(), "young_riemann");
    const auto [ia, ib] = window_indices(g.grid(), a, b, "young_riemann");
    const std::vector<double>& fv = f.values.values();
    const std::vector<double>& gv = g.values();
    double s = 0.0;
    for (std::size_t k = ia; k < ib; ++k) {
        double xi;
        switch (point) {
        case EvalPoint::left: xi = fv[k]; break;
        case EvalPoint::right: xi = fv[k + 1]; break;
        default: xi = 0.5 * (fv[k] + fv[k + 1]); break;
        }
        s += xi * (gv[k + 1] - gv[k]);
    }
    return s;
}

double young_fractional(const IntegrandSpec& f, const SampledPath& g, double a, double b,
                        FracOrder order) {
    require_same_grid(f.values.grid(), g.grid(), "young_fractional");
    const auto [ia, ib] = window_indices(g.grid(), a, b, "young_fractional");
    const double alpha = order.alpha();
    if (alpha >= f.holder_beta.beta())
        throw DomainError("young_fractional: order must stay below the integrand's "
                          "Holder exponent");

    const SampledPath fw = window_path(f.values, ia, ib);
    const SampledPath gw = window_path(g, ia, ib);
    const TimeGrid& sub = fw.grid();
    const std::size_t m = sub.n_steps();
    const double dt = sub.dt();
    const double fa = fw.values()[0];
    const double gb = gw.values()[m];

    std::vector<double> flat(fw.values());
    for (double& v : flat) v -= fa;
    std::vector<double> gshift(gw.values());
    for (double& v : gshift) v -= gb;

    const SampledPath df =
        weyl_derivative_left(SampledPath(sub, std::move(flat)), order, 0.0);
    const SampledPath dg = weyl_derivative_right(SampledPath(sub, std::move(gshift)),
                                                 FracOrder(1.0 - alpha), sub.horizon());

    // Regular part: both factors are finite with zeros at their tough ends.
    std::vector<double> prod(m + 1);
    for (std::size_t i = 0; i <= m; ++i) prod[i] = df.values()[i] * dg.values()[i];
    const double regular = trapezoid(prod, dt, 0, m);

    // Boundary part: f(a)/Gamma(1-a) times the (t-a)^-a moment of the right
    // derivative, integrated in closed form per cell.
    double boundary = 0.0;
    if (fa != 0.0) {
        const PowerWeights w = power_weights(1.0 - alpha, m, dt);
        double acc = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            const std::size_t cell = j + 1; // u = t - a spans [(cell-1)dt, cell dt]
            acc += dg.values()[j] * w.a[cell] +
                   (dg.values()[j + 1] - dg.values()[j]) * w.b[cell];
        }
        boundary = fa / std::tgamma(1.0 - alpha) * acc;
    }
    return -(boundary + regular);
}

FracOrder default_frac_order(double beta_f, double beta_g) {
    if (!(beta_f > 0.0) || !(beta_f <= 1.0) || !(beta_g > 0.0) || !(beta_g <= 1.0))
        throw DomainError("default_frac_order: exponents must lie in (0, 1]");
    const double eps = 0.01;
    const double lo = 1.0 - beta_g + eps;
    const double hi = beta_f - eps;
    if (!(lo < hi))
        throw DomainError("default_frac_order: no admissible order, the Young window "
                          "1 - beta_g < alpha < beta_f is too narrow");
    return FracOrder(std::clamp(0.5 * (1.0 - beta_g + beta_f), lo, hi));
}

double malliavin_phi_trace(const MalliavinKernel& kernel, const Kernel& phi,
                           const TimeGrid& grid, std::size_t node) {
    if (node >= grid.n_nodes())
        throw DomainError("malliavin_phi_trace: node index out of range");
    const double t = grid.node(node);
    switch (kernel.form()) {
    case MalliavinKernel::Form::zero: return 0.0;
    case MalliavinKernel::Form::indicator:
        return kernel.indicator_scale(t) * kernel_partial_integral(phi, t, t);
    case MalliavinKernel::Form::general: break;
    default:
        throw DomainError("malliavin_phi_trace: Malliavin kernel was never provided "
                          "(use MalliavinKernel::zero() for deterministic integrands)");
    }

    // General kernel: product-integrate s -> D_s f(t) against
    // phi(t,s) = H q |t-s|^(q-1), q = 2H-1, splitting at the node s = t.
    const std::size_t n = grid.n_steps();
    const double dt = grid.dt();
    const double q = 2.0 * phi.hurst() - 1.0;
    const PowerWeights w = power_weights(q, n, dt);
    std::vector<double> k(n + 1);
    for (std::size_t j = 0; j <= n; ++j) k[j] = kernel.evaluate(grid.node(j), t);

    double acc = 0.0;
    for (std::size_t j = 0; j < node; ++j) {   // s < t, u = t - s
        const std::size_t m = node - j;
        acc += k[j + 1] * w.a[m] + (k[j] - k[j + 1]) * w.b[m];
    }
    for (std::size_t j = node; j < n; ++j) {   // s > t, u = s - t
        const std::size_t m = j + 1 - node;
        acc += k[j] * w.a[m] + (k[j + 1] - k[j]) * w.b[m];
    }
    return phi.hurst() * q * acc;
}

double ito_integral(const IntegrandSpec& f, const SampledPath& driver, const Kernel& phi,
                    double a, double b) {
    require_same_grid(f.values.grid(), driver.grid(), "ito_integral");
    if (f.malliavin.form() == MalliavinKernel::Form::missing)
        throw DomainError("ito_integral: Malliavin kernel was never provided "
                          "(use MalliavinKernel::zero() for deterministic integrands)");
    const TimeGrid& grid = driver.grid();
    const auto [ia, ib] = window_indices(grid, a, b, "ito_integral");

    const double pathwise = young_riemann(f, driver, a, b, EvalPoint::left);
    std::vector<double> trace(grid.n_nodes(), 0.0);
    for (std::size_t i = ia; i <= ib; ++i)
        trace[i] = malliavin_phi_trace(f.malliavin, phi, grid, i);
    return pathwise - trapezoid(trace, grid.dt(), ia, ib);
}

double check_pathwise_ito_formula(const SmoothField& F, double eta0, const IntegrandSpec& f,
                                  const SampledPath& g, const SampledPath& driver) {
    if (!F.value || !F.dt || !F.dx)
        throw DomainError("check_pathwise_ito_formula: F needs value, dt and dx");
    require_same_grid(f.values.grid(), driver.grid(), "check_pathwise_ito_formula");
    require_same_grid(g.grid(), driver.grid(), "check_pathwise_ito_formula");

    const TimeGrid& grid = driver.grid();
    const std::size_t n = grid.n_steps();
    const double dt = grid.dt();
    const std::vector<double>& fv = f.values.values();
    const std::vector<double>& gv = g.values();
    const std::vector<double>& bv = driver.values();

    // eta from the same trapezoid / averaged-endpoint rules the right-hand
    // side uses, so the identity field F(t,x) = x closes exactly.
    std::vector<double> eta(n + 1);
    eta[0] = eta0;
    for (std::size_t k = 0; k < n; ++k)
        eta[k + 1] = eta[k] + 0.5 * dt * (gv[k] + gv[k + 1]) +
                     0.5 * (fv[k] + fv[k + 1]) * (bv[k + 1] - bv[k]);

    double rhs = F.value(0.0, eta0);
    double worst = std::abs(F.value(grid.node(0), eta[0]) - rhs);
    for (std::size_t k = 0; k < n; ++k) {
        const double t0 = grid.node(k), t1 = grid.node(k + 1);
        const double fx0 = F.dx(t0, eta[k]), fx1 = F.dx(t1, eta[k + 1]);
        rhs += 0.5 * dt * (F.dt(t0, eta[k]) + F.dt(t1, eta[k + 1]));
        rhs += 0.5 * dt * (fx0 * gv[k] + fx1 * gv[k + 1]);
        rhs += 0.5 * (fx0 * fv[k] + fx1 * fv[k + 1]) * (bv[k + 1] - bv[k]);
        worst = std::max(worst, std::abs(F.value(t1, eta[k + 1]) - rhs));
    }
    return worst;
}

double check_ito_ito_formula(const SmoothField& F, double eta0, const IntegrandSpec& f,
                             const SampledPath& g, const SampledPath& driver,
                             const MalliavinKernel& eta_kernel, const Kernel& phi) {
    if (!F.value || !F.dt || !F.dx || !F.dxx)
        throw DomainError("check_ito_ito_formula: F needs value, dt, dx and dxx");
    if (eta_kernel.form() == MalliavinKernel::Form::missing)
        throw DomainError("check_ito_ito_formula: the Malliavin kernel of eta was never "
                          "provided");
    if (f.malliavin.form() == MalliavinKernel::Form::missing)
        throw DomainError("check_ito_ito_formula: f needs its Malliavin kernel");
    require_same_grid(f.values.grid(), driver.grid(), "check_ito_ito_formula");
    require_same_grid(g.grid(), driver.grid(), "check_ito_ito_formula");

    const TimeGrid& grid = driver.grid();
    const std::size_t n = grid.n_steps();
    const double dt = grid.dt();
    const std::vector<double>& fv = f.values.values();
    const std::vector<double>& gv = g.values();
    const std::vector<double>& bv = driver.values();

    std::vector<double> tr_f(n + 1), tr_eta(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        tr_f[i] = malliavin_phi_trace(f.malliavin, phi, grid, i);
        tr_eta[i] = malliavin_phi_trace(eta_kernel, phi, grid, i);
    }

    // eta(t) = eta0 + int g ds + int f delta-B, the Ito integral taken as
    // left Riemann sums minus the running trace correction.
    std::vector<double> eta(n + 1);
    eta[0] = eta0;
    for (std::size_t k = 0; k < n; ++k)
        eta[k + 1] = eta[k] + 0.5 * dt * (gv[k] + gv[k + 1]) +
                     fv[k] * (bv[k + 1] - bv[k]) - 0.5 * dt * (tr_f[k] + tr_f[k + 1]);

    // Right-hand side, term by term as the formula states it. The trace of
    // the composite integrand F_x f splits by linearity into an F_xx part
    // and an F_x part; the former cancels the explicit second-order term
    // only in exact arithmetic, and both are computed honestly here.
    double rhs = F.value(0.0, eta0);
    double worst = std::abs(F.value(grid.node(0), eta[0]) - rhs);
    auto composite = [&](std::size_t i) {
        const double t = grid.node(i);
        return F.dxx(t, eta[i]) * fv[i] * tr_eta[i] + F.dx(t, eta[i]) * tr_f[i];
    };
    auto second_order = [&](std::size_t i) {
        return F.dxx(grid.node(i), eta[i]) * fv[i] * tr_eta[i];
    };
    for (std::size_t k = 0; k < n; ++k) {
        const double t0 = grid.node(k), t1 = grid.node(k + 1);
        rhs += 0.5 * dt * (F.dt(t0, eta[k]) + F.dt(t1, eta[k + 1]));
        rhs += 0.5 * dt * (F.dx(t0, eta[k]) * gv[k] + F.dx(t1, eta[k + 1]) * gv[k + 1]);
        rhs += F.dx(t0, eta[k]) * fv[k] * (bv[k + 1] - bv[k]);
        rhs -= 0.5 * dt * (composite(k) + composite(k + 1));
        rhs += 0.5 * dt * (second_order(k) + second_order(k + 1));
        worst = std::max(worst, std::abs(F.value(t1, eta[k + 1]) - rhs));
    }
    return worst;
}

} // namespace fracsde
