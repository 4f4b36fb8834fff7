#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "fracsde/char_system.hpp"
#include "fracsde/time_grid.hpp"

// Quasilinear and linear equations, where the characteristic pipeline
// collapses to closed forms:
//
//   dx = b(t, x) dt + [a1(t) x + a0(t)] dB(t).
//
// The shift Gamma(t) has the explicit density h(t, u) = int_0^t a1(s)
// phi(s, u) ds, its inverse is omega - int h(t, .), and the z equation
// reduces through integrating factors
//
//   A1(t) = exp{- int_0^t a1 dB},   A2(t) = int_0^t A1 a0 dB
//
// to the ordinary differential equation y' = A1(t) beff(t, A1^{-1}(y + A2))
// with y = A1 z - A2, where beff(t, x) = b(t, x) + (a1(t) x + a0(t)) *
// int_0^t a1(v) phi(t, v) dv is the drift of the z equation (the kernel
// term is what distinguishes it from the naive pathwise reduction).
//
// When b is affine too, x has the explicit propagator form built from
// Psi(t, s); that route shares no code with the quasilinear one and serves
// as its oracle.
//
// All coefficients are deterministic functions of time. A random
// coefficient slot exists in the struct but is rejected by every solver:
// evaluating sigma along shifted paths is outside the numeric scope here.

namespace fracsde {

// Coefficients of the quasilinear equation. When a1_constant is set the
// solvers take closed-form fast paths for every kernel integral and a1 is
// read from a1_value (the a1 function may then be empty). The a1_random
// slot is reserved: setting it makes every solver throw DomainError.
struct QuasilinearCoeffs {
    std::function<double(double)> a1;
    std::function<double(double)> a0;
    std::function<double(double, double)> b;
    bool a1_constant = false;
    double a1_value = 0.0;
    std::function<double(double, const SampledPath&)> a1_random;
};

// Coefficients of the fully linear equation: b(t,x) = beta1(t) x + beta0(t),
// sigma(t,x) = a1(t) x + a0(t).
struct LinearCoeffs {
    std::function<double(double)> beta1;
    std::function<double(double)> beta0;
    std::function<double(double)> a1;
    std::function<double(double)> a0;
    bool a1_constant = false;
    double a1_value = 0.0;
};

// The two linear propagators on grid times t >= s:
//   Phi(t,s)  propagator of the z equation along the unshifted driver,
//             exponent  int_s^t beta1 + int_s^t a1 dB
//                      + int_s^t a1(u) [int_0^u a1(v) phi(u,v) dv] du;
//   Psi(t,s)  the same propagator evaluated along the inverted shift,
//             exponent  int_s^t beta1 + int_s^t a1 dB
//                      - int_s^t du int_u^t a1(u) a1(w) phi(w,u) dw.
// Both satisfy Phi(t,t) = Psi(t,t) = 1 and are positive. No flow property
// is claimed: the kernel corrections do not compose multiplicatively.
struct LinearKernels {
    std::function<double(double, double)> Phi;
    std::function<double(double, double)> Psi;
};

// Shift families of the quasilinear equation on the grid: gamma[i] has
// density u -> int_0^{t_i} a1(s) phi(s, u) ds and lambda[i] its exact
// negative. Closed form when a1 is constant, product integration in s
// otherwise.
std::pair<std::vector<ShiftMap>, std::vector<ShiftMap>> quasilinear_gamma_lambda(
    const QuasilinearCoeffs& coeffs, const Kernel& kernel, const TimeGrid& grid);

// Integrating factors along the given driver,
//   A1(t) = exp{- int_0^t a1 dB},   A2(t) = int_0^t A1 a0 dB,
// both integrals as midpoint Riemann sums (exact for constant a1 by
// telescoping). Throws OverflowError with the offending exponent when the
// A1 exponent leaves the representable range.
std::pair<SampledPath, SampledPath> integrating_factors(const QuasilinearCoeffs& coeffs,
                                                        const SampledPath& driver);

// Full quasilinear solve: explicit shifts, integrating factors, the y ODE
// by classical fourth-order steps on the grid (order is limited by the
// driver's roughness through A1, not by the stepper), then x(t) = z(t)
// re-evaluated along the inverted shift for each output node.
SampledPath solve_quasilinear(const QuasilinearCoeffs& coeffs, double eta,
                              const SampledPath& B, const Kernel& kernel);

// Explicit affine solution
//   x(t) = Psi(t,0) x0 + int_0^t Psi(t,s) beta0 ds + int_0^t Psi(t,s) a0 dB(s)
//        - int_0^t Psi(t,s) a0(s) [int_s^t a1(v) phi(v,s) dv] ds,
// assembled from kernel closed forms and midpoint Riemann sums. The last
// term's sign and inner range are the ones produced by composing the z
// propagator with the inverted shift; they make the route agree pathwise
// with solve_quasilinear and give E x(t) = x0 when beta0 = beta1 = 0.
SampledPath solve_linear_explicit(const LinearCoeffs& lin, double x0, const SampledPath& B,
                                  const Kernel& kernel);

// The propagators as callable objects over grid times (t >= s, both on the
// grid). General a1 precomputes the lower-triangular double-integral
// table, O(n^2) memory; constant a1 is closed form.
LinearKernels linear_kernels(const LinearCoeffs& lin, const SampledPath& B,
                             const Kernel& kernel);

}  // namespace fracsde
