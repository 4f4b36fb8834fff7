#pragma once

#include <functional>

#include "fracsde/frac_calc.hpp"
#include "fracsde/time_grid.hpp"

// Stochastic integrals against a Holder driver B with exponent above 1/2,
// three ways:
//
//   young_riemann     limit-free Riemann sums Sum f(xi_k) (B_{k+1} - B_k)
//                     with a selectable evaluation point; the Young
//                     condition beta_f + beta_B > 1 makes every choice
//                     converge to the same pathwise integral.
//   young_fractional  the same integral through fractional calculus:
//                     - int_a^b D^a_{a+} f (t) * D^{1-a}_{b-} (g - g(b)) (t) dt,
//                     with the boundary part of D^a_{a+} f integrated in
//                     closed form against the (t-a)^-a singularity. The
//                     leading minus is the one sign convention consistent
//                     with Riemann-sum limits once the right derivative is
//                     taken in its real-valued form (see frac_calc.hpp).
//   ito_integral      Wick-Ito integral int f dB = pathwise integral minus
//                     the Malliavin trace int D^phi_t f(t) dt, where
//                     D^phi_t f(t) = int_0^T phi(t,s) D_s f(t) ds.
//
// Malliavin kernels are caller-supplied data, never derived symbolically.
// A kernel must be given explicitly even when it vanishes: a silently
// assumed zero would turn an Ito integral into a pathwise one with no
// warning. The indicator form D_s f(t) = c(t) 1_{[0,t]}(s), which covers
// integrands f(t) = h(B(t)), keeps a closed-form trace; anything else is
// product-integrated numerically in s.
//
// All functions are pure; Monte Carlo drivers map them over seeds freely.

namespace fracsde {

class MalliavinKernel {
public:
    enum class Form { missing, zero, indicator, general };

    // Default-constructed kernels mean "not provided" and are rejected by
    // the Ito machinery.
    MalliavinKernel() = default;

    static MalliavinKernel zero();
    // D_s f(t) = scale(t) * 1_{[0,t]}(s)
    static MalliavinKernel indicator(std::function<double(double)> scale);
    // D_s f(t) = evaluator(s, t), finite on [0,T]^2
    static MalliavinKernel general(std::function<double(double, double)> evaluator);

    Form form() const noexcept { return form_; }
    double evaluate(double s, double t) const;
    double indicator_scale(double t) const;

private:
    Form form_ = Form::missing;
    std::function<double(double, double)> evaluator_;
    std::function<double(double)> scale_;
};

struct IntegrandSpec {
    SampledPath values;        // f(t) along the realized path
    MalliavinKernel malliavin; // D_s f(t); missing unless supplied
    HolderExponent holder_beta;
};

enum class EvalPoint { left, mid, right };

// Midpoint evaluation reads the piecewise-linear interpolant, i.e. the
// average of the two cell endpoint values.
double young_riemann(const IntegrandSpec& f, const SampledPath& g, double a, double b,
                     EvalPoint point);

double young_fractional(const IntegrandSpec& f, const SampledPath& g, double a, double b,
                        FracOrder alpha);

// Center of the admissible order window 1 - beta_g < alpha < beta_f,
// clipped to keep a 0.01 margin from both ends; empty window is a domain
// error (the Young condition fails).
FracOrder default_frac_order(double beta_f, double beta_g);

// D^phi_t f(t) at one grid node: the phi-weighted trace of the Malliavin
// kernel, int_0^T phi(t,s) D_s f(t) ds. Exposed for the formula checks.
double malliavin_phi_trace(const MalliavinKernel& kernel, const Kernel& phi,
                           const TimeGrid& grid, std::size_t node);

double ito_integral(const IntegrandSpec& f, const SampledPath& driver, const Kernel& phi,
                    double a, double b);

// A scalar field F(t, x) with the derivatives the Ito formulas consume.
// dxx may be left empty for the pathwise (first-order) formula.
struct SmoothField {
    std::function<double(double, double)> value;
    std::function<double(double, double)> dt;
    std::function<double(double, double)> dx;
    std::function<double(double, double)> dxx;
};

// Both checks build eta(t) = eta0 + int_0^t g ds + int_0^t f d(driver) with
// the same quadrature they use on the right-hand side, evaluate both sides
// of the corresponding change-of-variable formula at every node, and return
// the largest node residual.
//
// Pathwise formula (no second-order term; the driver has zero quadratic
// variation):
//   F(t, eta) = F(0, eta0) + int F_t ds + int F_x g ds + int F_x f dB.
double check_pathwise_ito_formula(const SmoothField& F, double eta0, const IntegrandSpec& f,
                                  const SampledPath& g, const SampledPath& driver);

// Ito-Ito formula: the stochastic term is a genuine Ito integral and the
// trace term restores the balance:
//   F(t, eta) = F(0, eta0) + int F_t ds + int F_x g ds + int F_x f delta-B
//               + int F_xx f D^phi_s eta(s) ds.
// eta_kernel supplies D_s eta(t); it must be provided, as must f.malliavin
// and F.dxx.
double check_ito_ito_formula(const SmoothField& F, double eta0, const IntegrandSpec& f,
                             const SampledPath& g, const SampledPath& driver,
                             const MalliavinKernel& eta_kernel, const Kernel& phi);

} // namespace fracsde
