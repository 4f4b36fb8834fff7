#pragma once

// Internal quadrature helper shared by the integral and solver translation
// units. Not installed.

#include <cmath>
#include <cstddef>
#include <vector>

namespace fracsde::detail {

// Closed-form moments of the power kernel u^(q-1), q in (0,1), over the
// cell u in [(m-1)dt, m dt] against a linear interpolant: the cell integral
// is v_lo * A(m) + (v_hi - v_lo) * B(m) with v at the cell's low/high u end.
struct PowerWeights {
    std::vector<double> a, b;
};

inline PowerWeights power_weights(double q, std::size_t span, double dt) {
    PowerWeights w;
    w.a.assign(span + 1, 0.0);
    w.b.assign(span + 1, 0.0);
    const double dtq = std::pow(dt, q);
    std::vector<double> pq(span + 1), pq1(span + 1);
    for (std::size_t m = 0; m <= span; ++m) {
        pq[m] = std::pow(static_cast<double>(m), q);
        pq1[m] = std::pow(static_cast<double>(m), q + 1.0);
    }
    for (std::size_t m = 1; m <= span; ++m) {
        const double da = (pq[m] - pq[m - 1]) / q;
        w.a[m] = dtq * da;
        w.b[m] = dtq * ((pq1[m] - pq1[m - 1]) / (q + 1.0) -
                        static_cast<double>(m - 1) * da);
    }
    return w;
}

}  // namespace fracsde::detail
