#pragma once

#include "fracsde/time_grid.hpp"

// Fractional calculus of order alpha in (0,1) on sampled paths:
//
//   frac_integral_left      I^a_{a+} f(t) = (1/G(a)) int_a^t (t-s)^(a-1) f(s) ds
//   weyl_derivative_left    D^a_{a+} f(t) = (1/G(1-a)) [ f(t)/(t-a)^a
//                              + a int_a^t (f(t)-f(s)) (t-s)^(-a-1) ds ]
//   weyl_derivative_right   D^a_{b-} f(t) = (1/G(1-a)) [ f(t)/(b-t)^a
//                              + a int_t^b (f(t)-f(s)) (s-t)^(-a-1) ds ]
//
// The right derivative is the real-valued form: the complex phase that some
// texts attach to it is dropped here and accounted for once, by the sign
// convention of the pairing that consumes these derivatives (see
// integrators.hpp), which is fixed against Riemann-sum limits.
//
// Quadrature: the singular kernels are integrated in closed form against the
// piecewise-linear interpolant of f (product integration), so all three
// operations are exact up to roundoff whenever f is piecewise linear on the
// grid, and the divergence a naive point rule hits at the kernel singularity
// never arises.
//
// Sentinel policy: a node where the operator is undefined carries a quiet
// NaN instead of a fabricated number. Concretely, nodes outside the window
// ([a, T] for the left operations, [0, b] for the right one) are NaN, and so
// is the window endpoint t = a (resp. t = b) of a derivative unless f
// vanishes there, in which case the limit exists and equals 0. Downstream
// consumers integrate these outputs by open quadrature, which never touches
// the flagged nodes.
//
// All functions are pure and safe to call concurrently.

namespace fracsde {

class FracOrder {
public:
    explicit FracOrder(double alpha);
    double alpha() const { return alpha_; }

private:
    double alpha_;
};

SampledPath frac_integral_left(const SampledPath& f, FracOrder order, double a);

// Requires f smoother than the order: Holder continuous of exponent > alpha
// on the window. That premise is the caller's, but clear violations are
// caught heuristically by comparing the grid Holder quotient of exponent
// alpha across scales; a path much rougher than alpha is a domain error.
SampledPath weyl_derivative_left(const SampledPath& f, FracOrder order, double a);
SampledPath weyl_derivative_right(const SampledPath& f, FracOrder order, double b);

} // namespace fracsde
