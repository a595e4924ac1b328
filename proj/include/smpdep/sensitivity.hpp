#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "smpdep/solver.hpp"

namespace smpdep {

enum class Metric { Availability, Mttf };

inline const char* metric_name(Metric m) {
    return m == Metric::Availability ? "availability" : "mttf";
}

// Scaled sensitivity of one steady-state metric to one rate
// parameter: (dG/ds) * (s / G), dimensionless, so rows for
// availability and MTTF are comparable despite their units.
struct SensitivityEntry {
    std::string parameter;
    Metric metric = Metric::Availability;
    double scaled = 0.0;
    double derivative = 0.0;  // dG/ds in the metric's own units
    double step = 0.0;        // absolute step of the reported estimate
    // Restart, reboot and repair clocks never appear on the
    // failure-free walk, so their MTTF derivative is zero by
    // construction rather than by differencing.
    bool structural_zero = false;
    // Set when halving the step moves the derivative by more than
    // one part in a thousand; the value is then dominated by noise.
    bool low_confidence = false;
};

struct SensitivityOptions {
    double rel_step = 1e-4;
    SolverOptions solver{};
};

namespace detail {

struct FdEstimate {
    double derivative = 0.0;
    double step = 0.0;
    bool low_confidence = false;
};

// Symmetric difference quotient at x0 with step rel_step * x0, cross
// checked against the half-step quotient. Truncation error shrinks
// fourfold under halving, so disagreement beyond 1e-3 relative means
// the estimate is unreliable (step too coarse or metric too noisy).
template <class F>
FdEstimate central_difference(F&& f, double x0, double rel_step) {
    if (!(x0 > 0.0) || !std::isfinite(x0))
        throw std::domain_error("finite difference requires a positive base point");
    if (!(rel_step > 0.0) || rel_step >= 1.0)
        throw std::domain_error("relative step must lie in (0, 1)");
    auto slope = [&](double h) { return (f(x0 + h) - f(x0 - h)) / (2.0 * h); };
    const double h = rel_step * x0;
    const double d1 = slope(h);
    const double d2 = slope(0.5 * h);
    FdEstimate out{d1, h, false};
    if (d1 != d2) {
        double scale = std::fmax(std::fabs(d1), std::fabs(d2));
        out.low_confidence = std::fabs(d1 - d2) > 1e-3 * scale;
    }
    return out;
}

// Clocks that only shape the recovery side of the chain. The
// absorbing walk stops at the first down state, before any of these
// fire, so the MTTF cannot depend on them.
inline bool mttf_independent(const std::string& path) {
    static const std::vector<std::string> names = {
        "restart",          "restart_sfs", "restart_sfs_vms", "reboot",
        "restart_all_sfs",  "restart_all_sfs_vms", "reboot_all", "repair"};
    auto last = path.rfind('.');
    if (last == std::string::npos) return false;
    auto prev = path.rfind('.', last - 1);
    std::string clock = path.substr(prev == std::string::npos ? 0 : prev + 1,
                                    last - (prev == std::string::npos ? 0 : prev + 1));
    return std::find(names.begin(), names.end(), clock) != names.end();
}

// Availability sits within 1e-7 of one, so differencing it directly
// would subtract two near-identical numbers. The downtime mass keeps
// full relative precision; dA/ds = -dU/ds recovers the availability
// derivative without the cancellation.
inline double differencing_target(const Topology& topo, const ParameterSet& params,
                                  Metric metric, const SolverOptions& solver) {
    if (metric == Metric::Availability)
        return solve_steady_state(topo, params, solver).unavailability;
    return solve_time_to_failure(topo, params, solver).mttf;
}

inline double metric_value(const Topology& topo, const ParameterSet& params,
                           Metric metric, const SolverOptions& solver) {
    if (metric == Metric::Availability)
        return solve_steady_state(topo, params, solver).availability;
    return solve_time_to_failure(topo, params, solver).mttf;
}

} // namespace detail

// One parameter, one metric. `path` must address a single scalar
// (no wildcards); use full_report to rank everything at once.
inline SensitivityEntry scaled_sensitivity(const Topology& topo, const ParameterSet& params,
                                           const std::string& path, Metric metric,
                                           const SensitivityOptions& options = {}) {
    ParameterSet probe = params;
    auto refs = resolve_params(probe, path);
    if (refs.size() != 1)
        throw ConfigError("sensitivity needs a single scalar parameter; '" + path +
                          "' matches " + std::to_string(refs.size()));
    SensitivityEntry entry;
    entry.parameter = refs[0].path;
    entry.metric = metric;

    if (metric == Metric::Mttf && detail::mttf_independent(entry.parameter)) {
        entry.structural_zero = true;
        return entry;
    }

    const double base = detail::metric_value(topo, params, metric, options.solver);
    if (base == 0.0)
        throw std::domain_error("metric is zero at the base point; scaled sensitivity undefined");

    const double x0 = refs[0].get();
    auto f = [&](double x) {
        ParameterSet p = params;
        resolve_params(p, entry.parameter)[0].set(x);
        return detail::differencing_target(topo, p, metric, options.solver);
    };
    detail::FdEstimate fd = detail::central_difference(f, x0, options.rel_step);
    double derivative = metric == Metric::Availability ? -fd.derivative : fd.derivative;
    if (derivative == 0.0) derivative = 0.0;  // collapse -0 from the sign flip
    entry.derivative = derivative;
    entry.step = fd.step;
    entry.low_confidence = fd.low_confidence;
    entry.scaled = derivative * x0 / base;
    return entry;
}

// Every rate parameter crossed with both metrics, sorted by |scaled|
// descending so the ranking reads top-down; ties keep path order.
inline std::vector<SensitivityEntry> full_report(const Topology& topo, const ParameterSet& params,
                                                 const SensitivityOptions& options = {}) {
    ParameterSet probe = params;
    std::vector<SensitivityEntry> out;
    for (const auto& ref : list_params(probe))
        for (Metric metric : {Metric::Availability, Metric::Mttf})
            out.push_back(scaled_sensitivity(topo, params, ref.path, metric, options));
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return std::fabs(a.scaled) > std::fabs(b.scaled);
    });
    return out;
}

} // namespace smpdep
