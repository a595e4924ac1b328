#pragma once

#include <cmath>
#include <queue>
#include <vector>

#include "smpdep/errors.hpp"

namespace smpdep {

// Adaptive Gauss-Kronrod quadrature on a finite interval: 7-point Gauss
// embedded in 15-point Kronrod, interval with the largest error estimate
// split first. Integrands here are smooth products of survival functions
// times a density, truncated upstream at a high quantile, so convergence
// is fast; the interval cap exists to fail loudly instead of spinning.

struct QuadratureSettings {
    double rel_tol = 1e-10;
    double abs_tol = 0.0;
    int max_intervals = 4000;
};

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int intervals = 0;
};

namespace detail {

// Standard K15/G7 nodes and weights on [-1, 1] (positive half).
inline constexpr double kKronrodNodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
inline constexpr double kKronrodWeights[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr double kGaussWeights[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

template <typename F>
inline void kronrod_15(F&& f, double a, double b, double& kron, double& err) {
    const double h = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double fk[15];
    for (int i = 0; i < 7; ++i) {
        fk[i] = f(mid - h * kKronrodNodes[i]);
        fk[14 - i] = f(mid + h * kKronrodNodes[i]);
    }
    fk[7] = f(mid);
    double sk = 0.0;
    for (int i = 0; i < 7; ++i) sk += kKronrodWeights[i] * (fk[i] + fk[14 - i]);
    sk += kKronrodWeights[7] * fk[7];
    // Gauss points are the odd-index Kronrod points.
    double sg = 0.0;
    for (int i = 0; i < 3; ++i) sg += kGaussWeights[i] * (fk[2 * i + 1] + fk[13 - 2 * i]);
    sg += kGaussWeights[3] * fk[7];
    kron = sk * h;
    err = std::fabs((sk - sg) * h);
}

struct Segment {
    double a, b, value, error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

} // namespace detail

template <typename F>
QuadratureResult integrate_adaptive(F&& f, double a, double b,
                                    const QuadratureSettings& settings = {}) {
    QuadratureResult res;
    if (!(b > a)) return res;
    if (!std::isfinite(a) || !std::isfinite(b))
        throw NumericalError("adaptive quadrature requires a finite interval");

    std::priority_queue<detail::Segment> queue;
    double kron, err;
    detail::kronrod_15(f, a, b, kron, err);
    queue.push({a, b, kron, err});
    double total = kron, total_err = err;
    int used = 1;

    auto tolerance = [&](double estimate) {
        return std::fmax(settings.abs_tol, settings.rel_tol * std::fabs(estimate));
    };

    while (total_err > tolerance(total)) {
        if (used >= settings.max_intervals)
            throw NumericalError("adaptive quadrature interval cap reached (error estimate " +
                                 std::to_string(total_err) + ")");
        detail::Segment worst = queue.top();
        queue.pop();
        double mid = 0.5 * (worst.a + worst.b);
        detail::Segment left{worst.a, mid, 0, 0}, right{mid, worst.b, 0, 0};
        detail::kronrod_15(f, left.a, left.b, left.value, left.error);
        detail::kronrod_15(f, right.a, right.b, right.value, right.error);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        queue.push(left);
        queue.push(right);
        ++used;
    }

    res.value = total;
    res.error_estimate = total_err;
    res.intervals = used;
    return res;
}

} // namespace smpdep
