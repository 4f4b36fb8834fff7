#pragma once

// Internal rolling quadrature for kernel-weighted integrals of a
// node-sampled integrand w against phi(s, u) = H q |s - u|^(q-1),
// q = 2H - 1. Shared by the quasilinear and characteristic translation
// units. Not installed.

#include <cstddef>
#include <vector>

#include "fracsde/time_grid.hpp"

#include "power_weights.hpp"

namespace fracsde::detail {

// Densities rho_i(u_j) = int_0^{t_i} w(s) phi(s, u_j) ds, advanced one
// s-cell at a time with w piecewise linear and the kernel integrated in
// closed form per cell. After i calls to advance(), density() holds rho_i
// at every grid node u_j (including u_j > t_i).
class ShiftDensityAccumulator {
public:
    ShiftDensityAccumulator(std::vector<double> w, const Kernel& kernel, const TimeGrid& grid)
        : w_(std::move(w)),
          hq_(kernel.hurst() * (2.0 * kernel.hurst() - 1.0)),
          weights_(power_weights(2.0 * kernel.hurst() - 1.0, grid.n_steps(), grid.dt())),
          density_(grid.n_steps() + 1, 0.0) {}

    std::size_t cells() const noexcept { return cell_; }
    const std::vector<double>& density() const noexcept { return density_; }

    // Fold the s-cell [t_i, t_{i+1}], i = cells(), into every node's value.
    void advance() {
        const std::size_t i = cell_;
        const double wl = w_[i], wh = w_[i + 1];
        for (std::size_t j = 0; j <= i; ++j) {
            const std::size_t m = i - j + 1;
            density_[j] += hq_ * (wl * weights_.a[m] + (wh - wl) * weights_.b[m]);
        }
        for (std::size_t j = i + 1; j < density_.size(); ++j) {
            const std::size_t m = j - i;
            density_[j] += hq_ * (wh * weights_.a[m] + (wl - wh) * weights_.b[m]);
        }
        ++cell_;
    }

private:
    std::vector<double> w_;
    double hq_;
    PowerWeights weights_;
    std::vector<double> density_;
    std::size_t cell_ = 0;
};

// Tail integrals K_i(u_j) = int_{u_j}^{t_i} w(s) phi(s, u_j) ds for j <= i,
// advanced one s-cell at a time (only cells at or after u_j contribute).
class TailKernelAccumulator {
public:
    TailKernelAccumulator(std::vector<double> w, const Kernel& kernel, const TimeGrid& grid)
        : w_(std::move(w)),
          hq_(kernel.hurst() * (2.0 * kernel.hurst() - 1.0)),
          weights_(power_weights(2.0 * kernel.hurst() - 1.0, grid.n_steps(), grid.dt())),
          tail_(grid.n_steps() + 1, 0.0) {}

    std::size_t cells() const noexcept { return cell_; }
    const std::vector<double>& tail() const noexcept { return tail_; }

    void advance() {
        const std::size_t i = cell_;
        const double wl = w_[i], wh = w_[i + 1];
        for (std::size_t j = 0; j <= i; ++j) {
            const std::size_t m = i - j + 1;
            tail_[j] += hq_ * (wl * weights_.a[m] + (wh - wl) * weights_.b[m]);
        }
        ++cell_;
    }

private:
    std::vector<double> w_;
    double hq_;
    PowerWeights weights_;
    std::vector<double> tail_;
    std::size_t cell_ = 0;
};

// Anchored prefix integrals d_i = int_0^{t_i} w(v) phi(t_i, v) dv at every
// node; O(n^2), not incremental (the kernel is anchored at the moving t_i).
inline std::vector<double> kernel_weighted_prefix(const std::vector<double>& w,
                                                  const Kernel& kernel, const TimeGrid& grid) {
    const std::size_t n = grid.n_steps();
    const double hq = kernel.hurst() * (2.0 * kernel.hurst() - 1.0);
    const PowerWeights pw = power_weights(2.0 * kernel.hurst() - 1.0, n, grid.dt());
    std::vector<double> out(n + 1, 0.0);
    for (std::size_t i = 1; i <= n; ++i) {
        double acc = 0.0;
        for (std::size_t m = 1; m <= i; ++m) {
            const double vl = w[i - m + 1], vh = w[i - m];
            acc += vl * pw.a[m] + (vh - vl) * pw.b[m];
        }
        out[i] = hq * acc;
    }
    return out;
}

}  // namespace fracsde::detail
