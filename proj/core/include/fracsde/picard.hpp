#pragma once

#include "fracsde/errors.hpp"
#include "fracsde/time_grid.hpp"

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace fracsde {

// Fixed points of progressive mappings on path space.
//
// A mapping F on trajectories is progressive when its output on [0, a]
// depends only on the input on [0, a]. For such mappings, x = F(x) can be
// solved by Picard iteration on a chain of short sub-intervals: on each one
// the step length is chosen from the problem's constants so that F contracts
// at factor <= 1/2 in the combined sup + Holder norm, successive iterates
// then converge geometrically, and the converged segment becomes frozen
// prefix for the next sub-interval. No Gronwall argument is needed; the
// interval chain itself provides the global bound.
//
// Trajectories are stored at grid nodes as vectors of state_dim components.
// apply_F receives the grid, a prefix end index, and the full candidate; it
// must return the mapped trajectory on nodes [0, prefix_end] and may ignore
// everything after. Integral mappings are expected to quadrature internally.

using Trajectory = std::vector<std::vector<double>>;

struct ContractionProblem {
    // Dimension of the state vector at each node.
    std::size_t state_dim = 1;

    // The progressive mapping: (grid, prefix_end, candidate) -> mapped
    // trajectory, valid on nodes [0, prefix_end].
    std::function<Trajectory(const TimeGrid&, std::size_t, const Trajectory&)> apply_F;

    // F(0, x), independent of x by progressivity; also the initial iterate.
    std::vector<double> F0;

    // Contraction constants: the mapping's difference bound scales like
    // kappa * (interval length)^gamma, so steps of (2 kappa)^{-1/gamma} give
    // factor 1/2. kappa > 0, gamma in (0, 1].
    double kappa = 1.0;
    double gamma = 1.0;

    // Holder exponent of the norm the iteration is measured in.
    HolderExponent beta{1.0};

    // Hard cap on sub-interval length.
    double Delta = 1.0;

    // Optional growth control h(s1, s2, h1, h2), nondecreasing in each
    // argument: bounds the mapping's local constant in terms of sup and
    // Holder norms of the two trajectories it compares. The step must also
    // stay below h(...)^{-1/gamma}, evaluated at the solution's norms. When
    // absent, only kappa and Delta constrain the step.
    std::function<double(double, double, double, double)> h_bound;

    // Optional window-dependent kappa(t0, t1), overriding the global kappa
    // on [t0, t1]. Used when the contraction constant rides on the driver's
    // local Holder norm. Must stay positive.
    std::function<double(double, double)> kappa_window;
};

struct PicardReport {
    Trajectory solution;

    // (start time, length) of each sub-interval, in order; lengths sum to
    // the horizon.
    std::vector<std::pair<double, double>> sub_intervals;
    std::vector<int> iterations_per_interval;

    // max over nodes of the sup-norm distance between solution and
    // apply_F(solution); at most ~1.5 * tol when the step rule holds.
    double residual = 0.0;

    // (c1, c2) with sup/holder bounds <= c2 * exp(c1 * kappa^{1/gamma} * T)
    // * (1 + |F0|); c1 carries the kappa rate, c2 folds the Delta-driven
    // part of the interval count.
    std::pair<double, double> bound_constants{0.0, 0.0};
};

struct GrowthBound {
    double sup_bound;
    double holder_bound;
    double tau0;
};

// Solve x = F(x) on the grid. Iterates sub-interval by sub-interval until
// successive iterates differ by less than tol in the sup + Holder norm of
// the segment, with at most max_iter iterations per sub-interval. The step
// estimate uses the current iterate's norms and is re-validated against the
// converged segment; a violated estimate halves the step and re-solves.
//
// initial_guess, when given, seeds the iteration instead of the constant F0
// extension (the fixed point does not depend on it; see the uniqueness
// tests).
//
// Throws DomainError for malformed problems, ContractionFailureError when
// the successive-difference ratio stays >= 1 for three iterations (the
// declared constants do not actually contract), ResolutionError when the
// required step falls below one grid cell, and NumericalError when a
// sub-interval exhausts max_iter.
PicardReport solve_fixed_point(const ContractionProblem& problem, const TimeGrid& grid,
                               double tol, int max_iter,
                               const Trajectory* initial_guess = nullptr);

// A priori bounds for the fixed point: sup and Holder norms are both capped
// by 2^{N+1} + 2^N |F0| where N = max(ceil(T / Delta),
// floor(T (2 kappa)^{1/gamma}) + 1) counts the sub-intervals of the uniform
// step tau0 = (2 kappa)^{-1/gamma} ∧ Delta, and each interval at worst
// doubles the running bound plus one. Loose by design; solutions sit far
// below it, and the engine's a posteriori steps are usually longer than
// tau0.
GrowthBound growth_bound(const ContractionProblem& problem, double T);

} // namespace fracsde
