#include "fracsde/picard.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

namespace fracsde {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double norm_inf(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double norm_inf_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// sup + Holder norm of (y - x) over nodes [i0, i1], treating the prefix node
// i0 as pinned (its delta is zero by construction).
double segment_delta_norm(const Trajectory& x, const Trajectory& y, const TimeGrid& grid,
                          std::size_t i0, std::size_t i1, double beta) {
    const std::size_t m = i1 - i0;
    const std::size_t dim = x[i0].size();
    std::vector<double> d(dim * (m + 1), 0.0);
    for (std::size_t i = 1; i <= m; ++i)
        for (std::size_t c = 0; c < dim; ++c) d[i * dim + c] = y[i0 + i][c] - x[i0 + i][c];

    double sup = 0.0;
    for (std::size_t i = dim; i < d.size(); ++i) sup = std::max(sup, std::abs(d[i]));

    std::vector<double> inv_gap(m + 1, 0.0);
    const double dt = grid.dt();
    for (std::size_t k = 1; k <= m; ++k) inv_gap[k] = std::pow(double(k) * dt, -beta);

    double hol = 0.0;
    for (std::size_t j = 1; j <= m; ++j) {
        for (std::size_t i = 0; i < j; ++i) {
            double num = 0.0;
            for (std::size_t c = 0; c < dim; ++c)
                num = std::max(num, std::abs(d[j * dim + c] - d[i * dim + c]));
            hol = std::max(hol, num * inv_gap[j - i]);
        }
    }
    return sup + hol;
}

void validate(const ContractionProblem& p, const TimeGrid& grid, double tol, int max_iter) {
    if (p.state_dim == 0) throw DomainError("solve_fixed_point: state_dim must be positive");
    if (!p.apply_F) throw DomainError("solve_fixed_point: apply_F is required");
    if (p.F0.size() != p.state_dim)
        throw DomainError("solve_fixed_point: F0 must have state_dim components");
    if (!(p.kappa > 0.0) || !std::isfinite(p.kappa))
        throw DomainError("solve_fixed_point: kappa must be positive and finite");
    if (!(p.gamma > 0.0) || p.gamma > 1.0)
        throw DomainError("solve_fixed_point: gamma must lie in (0, 1]");
    if (!(p.Delta > 0.0) || !std::isfinite(p.Delta))
        throw DomainError("solve_fixed_point: Delta must be positive and finite");
    if (!(tol > 0.0)) throw DomainError("solve_fixed_point: tol must be positive");
    if (max_iter < 1) throw DomainError("solve_fixed_point: max_iter must be at least 1");
    if (grid.n_steps() == 0) throw DomainError("solve_fixed_point: grid has no cells");
}

double step_from_constants(const ContractionProblem& p, double kap, double growth_M) {
    double tau = p.Delta;
    tau = std::min(tau, std::pow(2.0 * kap, -1.0 / p.gamma));
    if (growth_M > 0.0) tau = std::min(tau, std::pow(growth_M, -1.0 / p.gamma));
    return tau;
}

// Interval count of the uniform-step covering: Delta caps the step from
// above, the kappa rule from below, and partial trailing intervals count.
long interval_count(const ContractionProblem& p, double T) {
    double by_delta = std::ceil(T / p.Delta - 1e-12);
    double by_kappa = std::floor(T * std::pow(2.0 * p.kappa, 1.0 / p.gamma) + 1e-12) + 1.0;
    double n = std::max({by_delta, by_kappa, 1.0});
    return n > 1e6 ? 1000000L : static_cast<long>(n);
}

double pow2(long e) {
    if (e > 1023) return kInf;
    return std::ldexp(1.0, static_cast<int>(e));
}

} // namespace

PicardReport solve_fixed_point(const ContractionProblem& problem, const TimeGrid& grid,
                               double tol, int max_iter, const Trajectory* initial_guess) {
    validate(problem, grid, tol, max_iter);
    const std::size_t n = grid.n_steps();
    const double dt = grid.dt();
    const double beta = problem.beta.beta();

    Trajectory x;
    if (initial_guess) {
        if (initial_guess->size() != n + 1)
            throw DomainError("solve_fixed_point: initial guess has wrong node count");
        for (const auto& v : *initial_guess)
            if (v.size() != problem.state_dim)
                throw DomainError("solve_fixed_point: initial guess has wrong state_dim");
        x = *initial_guess;
    } else {
        x.assign(n + 1, problem.F0);
    }
    x[0] = problem.F0; // F(0, anything) = F0 by progressivity

    PicardReport report;
    double sup_so_far = norm_inf(problem.F0);

    std::size_t ik = 0;
    while (ik < n) {
        const double Tk = grid.node(ik);
        double kap = problem.kappa;
        if (problem.kappa_window) {
            kap = problem.kappa_window(Tk, std::min(Tk + problem.Delta, grid.horizon()));
            if (!(kap > 0.0) || !std::isfinite(kap))
                throw DomainError("solve_fixed_point: kappa_window returned a non-positive "
                                  "or non-finite value");
        }

        // A priori step from the norms of what is already converged.
        double M1 = 2.0 * kap * (1.0 + sup_so_far);
        double M2 = 2.0 * (1.0 + sup_so_far);
        double growth_M = problem.h_bound ? problem.h_bound(M2, M2, M1, M1) : 0.0;
        double tau = step_from_constants(problem, kap, growth_M);

        for (;;) {
            const std::size_t cells = static_cast<std::size_t>(std::floor(tau / dt + 1e-9));
            if (cells < 1) {
                char msg[160];
                std::snprintf(msg, sizeof msg,
                              "solve_fixed_point: required step %.3e is below one grid cell "
                              "%.3e near t = %.6g; refine the grid",
                              tau, dt, Tk);
                throw ResolutionError(msg, tau, dt);
            }
            const std::size_t ie = std::min(ik + cells, n);

            int iterations = 0;
            int bad_streak = 0;
            double prev_diff = kInf;
            double last_ratio = 0.0;
            bool converged = false;
            while (iterations < max_iter) {
                ++iterations;
                Trajectory y = problem.apply_F(grid, ie, x);
                if (y.size() < ie + 1)
                    throw DomainError("solve_fixed_point: apply_F returned too few nodes");
                double diff = segment_delta_norm(x, y, grid, ik, ie, beta);
                for (std::size_t i = ik + 1; i <= ie; ++i) x[i] = std::move(y[i]);
                if (diff < tol) {
                    converged = true;
                    break;
                }
                if (diff >= prev_diff) {
                    last_ratio = diff / prev_diff;
                    if (++bad_streak >= 3) {
                        char msg[200];
                        std::snprintf(msg, sizeof msg,
                                      "solve_fixed_point: no contraction on [%.6g, %.6g], "
                                      "successive differences grew for three iterations "
                                      "(last ratio %.3g); the declared constants are too "
                                      "optimistic",
                                      Tk, grid.node(ie), last_ratio);
                        throw ContractionFailureError(msg, Tk, grid.node(ie), last_ratio);
                    }
                } else {
                    bad_streak = 0;
                }
                prev_diff = diff;
            }
            if (!converged) {
                char msg[160];
                std::snprintf(msg, sizeof msg,
                              "solve_fixed_point: sub-interval [%.6g, %.6g] did not reach "
                              "tol within %d iterations",
                              Tk, grid.node(ie), max_iter);
                throw NumericalError(msg);
            }

            // A posteriori: the step was chosen from pre-convergence norms;
            // re-check it against the converged segment and re-solve on half
            // the step if it was too long.
            double seg_sup = sup_so_far;
            for (std::size_t i = ik + 1; i <= ie; ++i) seg_sup = std::max(seg_sup, norm_inf(x[i]));
            double M1p = 2.0 * kap * (1.0 + seg_sup);
            double M2p = 2.0 * (1.0 + seg_sup);
            double growth_Mp = problem.h_bound ? problem.h_bound(M2p, M2p, M1p, M1p) : 0.0;
            double tau_allowed = step_from_constants(problem, kap, growth_Mp);
            double tau_used = grid.node(ie) - Tk;
            if (tau_used <= tau_allowed + 1e-12) {
                report.sub_intervals.emplace_back(Tk, tau_used);
                report.iterations_per_interval.push_back(iterations);
                sup_so_far = seg_sup;
                ik = ie;
                break;
            }
            tau = 0.5 * tau_used;
        }
    }

    // Global residual on the full horizon.
    Trajectory y = problem.apply_F(grid, n, x);
    double residual = 0.0;
    for (std::size_t i = 0; i <= n; ++i)
        residual = std::max(residual, norm_inf_diff(x[i], y[i]));
    report.residual = residual;

    const double T = grid.horizon();
    const long N = interval_count(problem, T);
    const double c1 = std::log(2.0) * std::pow(2.0, 1.0 / problem.gamma);
    // c2 exp(c1 kappa^{1/gamma} T) = 2^{N+1}; keep the quotient in log2 space
    // so huge interval counts do not produce inf/inf.
    const double c2 =
        std::exp2(double(N + 1) - std::pow(2.0 * problem.kappa, 1.0 / problem.gamma) * T);
    report.bound_constants = {c1, c2};
    report.solution = std::move(x);
    return report;
}

GrowthBound growth_bound(const ContractionProblem& problem, double T) {
    if (!(T > 0.0) || !std::isfinite(T))
        throw DomainError("growth_bound: horizon must be positive and finite");
    if (problem.F0.size() != problem.state_dim)
        throw DomainError("growth_bound: F0 must have state_dim components");
    if (!(problem.kappa > 0.0) || !(problem.gamma > 0.0) || problem.gamma > 1.0 ||
        !(problem.Delta > 0.0))
        throw DomainError("growth_bound: constants out of range");

    const double tau0 = std::min(problem.Delta, std::pow(2.0 * problem.kappa, -1.0 / problem.gamma));
    const long N = interval_count(problem, T);
    const double f0 = norm_inf(problem.F0);
    const double bound = pow2(N + 1) + pow2(N) * f0;
    return GrowthBound{bound, bound, tau0};
}

} // namespace fracsde
