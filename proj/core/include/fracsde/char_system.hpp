#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "fracsde/picard.hpp"
#include "fracsde/time_grid.hpp"

// The characteristic system behind the Ito equation
//
//   dx(t) = b(t, x) dt + sigma(t, x) dB(t),   x(0) = eta,
//
// for deterministic coefficients. The Ito solution is produced in three
// moves: solve an auxiliary state z driven pathwise by B plus an explicit
// double-kernel drift, build the path-space shift Gamma(t) whose density is
// int_0^t sigma_x(s, z(s)) phi(s, u) ds, and evaluate x(t) = z(t, Lambda(t))
// where Lambda(t) inverts Gamma(t). With deterministic b and sigma the z
// equation decouples from Gamma, and every shift is an additive,
// absolutely continuous perturbation of the driver, so the whole pipeline
// stays finite dimensional on the grid.
//
// The inverse Lambda(t) exists only up to a path-dependent horizon; the
// fixed-point inversion monitors its own contraction ratio and reports a
// horizon error instead of extrapolating past it.

namespace fracsde {

// Deterministic coefficient pair with the derivatives the pipeline needs.
// The bounds |b| <= L(1+|x|), |b_x| <= L, |sigma| <= L(1+|x|),
// |sigma_x| + |sigma_xx| <= L are the caller's contract; lipschitz_L feeds
// the contraction constants, it is not re-verified pointwise.
struct CoefficientSet {
    std::function<double(double, double)> b;
    std::function<double(double, double)> b_x;
    std::function<double(double, double)> sigma;
    std::function<double(double, double)> sigma_x;
    std::function<double(double, double)> sigma_xx;
    double lipschitz_L = 1.0;
};

// One additive path shift: Gamma(t) - omega is absolutely continuous and
// is stored through its density u -> d/du (Gamma(t) - omega)(u) on the
// grid. Norms and the inversion iteration act on densities, matching the
// H_p space they live in.
struct ShiftMap {
    double base_time = 0.0;
    SampledPath density;
};

// z, the shift family along the grid, and the fixed-point diagnostics of
// the z solve. gamma[i] corresponds to grid node i; gamma[0] is the zero
// shift.
struct CharSolution {
    SampledPath z;
    std::vector<ShiftMap> gamma;
    PicardReport picard_report;
};

// Result of one shift inversion: Lambda(t) plus how hard it was to get.
// distances holds the successive-iterate H_p distances, one per iteration;
// their ratios are the empirical contraction record. theoretical_horizon is
// the conservative a-priori contraction bound 1 / (2 c_R); the solver does
// not enforce it, it reports it so the empirically detected horizon can be
// compared against it.
struct InvertResult {
    ShiftMap lambda;
    int iterations = 0;
    double last_ratio = 0.0;
    double theoretical_horizon = 0.0;
    std::vector<double> distances;
};

// Composed Ito solution at the requested times. When the shift inversion
// hits its horizon at some requested time, the result carries everything
// up to the last valid time and is flagged instead of throwing.
struct ComposedSolution {
    std::vector<double> times;
    std::vector<double> values;
    bool horizon_hit = false;
    double failed_time = 0.0;
    double theoretical_horizon = 0.0;
};

// Grid H_p norm of a density, (int |d(u)|^p du)^(1/p) by trapezoid.
double hp_norm(const SampledPath& density, double p);

// Midpoint of the admissible range (1, 1/(2-2H)) for the H_p exponent.
double default_hp_exponent(const Kernel& kernel);

// Driver B shifted by a ShiftMap: B(s) + int_0^s density(u) du, cumulative
// trapezoid on the grid. Negate the density first to apply an inverse.
SampledPath shifted_driver(const SampledPath& B, const SampledPath& density);

// Solve the decoupled z equation
//   z(t) = eta + int_0^t b(s, z) ds + int_0^t sigma(s, z) dB(s)
//        + int_0^t int_0^s sigma(s, z(s)) sigma_x(u, z(u)) phi(s, u) du ds
// as a fixed point under the progressive contraction engine. The stochastic
// term is the midpoint Young sum, the two time integrals are trapezoids,
// and the inner kernel integral is product-integrated (exact power-kernel
// cells against a linear interpolant). Contraction constants, also the ones
// the growth-bound cross-checks should rebuild:
//   kappa(a, b) = L (1 + |B|_{a,b,beta}) + L^2 T^(2H-1),   gamma = beta.
// Requires 1/2 < beta < H.
std::pair<SampledPath, PicardReport> solve_z(const CoefficientSet& coeffs, double eta,
                                             const SampledPath& B, const Kernel& kernel,
                                             const HolderExponent& beta);

// Shift family along z: density_i(u) = int_0^{t_i} sigma_x(s, z(s)) phi(s, u) ds
// for every grid node t_i, by product integration in s (exact for the
// power kernel against a linear interpolant of sigma_x(s, z(s))).
std::vector<ShiftMap> build_gamma(const CoefficientSet& coeffs, const SampledPath& z,
                                  const Kernel& kernel);

// solve_z plus build_gamma in one call.
CharSolution solve_characteristics(const CoefficientSet& coeffs, double eta,
                                   const SampledPath& B, const Kernel& kernel,
                                   const HolderExponent& beta);

// Invert Gamma(t) by the fixed-point iteration Lambda_{n+1} = omega - G(Lambda_n),
// re-solving z along each candidate shifted path (warm-started from the
// previous iterate; eta is the initial value those re-solves use). Stops
// when successive densities differ by less than tol in the H_p grid norm.
// Divergence (contraction ratio >= 1 twice in a row) or running out of
// iterations raises HorizonExceededError: the inverse only exists up to a
// path-dependent horizon and this is how the solver finds out.
InvertResult invert_gamma(const CoefficientSet& coeffs, double eta, const SampledPath& B,
                          const Kernel& kernel, const HolderExponent& beta, double t,
                          double tol, int max_iter);

// x(t) = z(t, Lambda(t)) at each requested time: invert the shift there,
// re-solve z along the shifted driver, take its endpoint value.
// out_times must be grid times in increasing order. A horizon failure at
// some time truncates the output and sets the flag.
ComposedSolution compose_solution(const CoefficientSet& coeffs, double eta,
                                  const SampledPath& B, const Kernel& kernel,
                                  const HolderExponent& beta,
                                  const std::vector<double>& out_times,
                                  double tol = 1e-8, int max_iter = 50);

// Residual of the deterministic-integrand shift identity
//   int f d(B + int h) = int f dB + int f(s) h(s) ds
// evaluated on the grid with the given shift density; returns the absolute
// difference of the two sides.
double shift_lemma_check(const std::function<double(double)>& f, const ShiftMap& gamma,
                         const SampledPath& B);

}  // namespace fracsde
