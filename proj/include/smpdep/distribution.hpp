#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>

#include "smpdep/errors.hpp"
#include "smpdep/rng.hpp"

namespace smpdep {

// Time-to-event distributions supported by the model. Rates are per
// hour; all durations in the library are in hours.

struct Exponential {
    double rate;
};

// Sum of two independent exponential phases. With nearly equal phase
// rates the two-rate closed forms degrade: their partial-fraction
// coefficients grow like rate/(rate2 - rate1), so every downstream
// value carries an absolute rounding error near machine-epsilon
// divided by the relative gap. At a gap of 1e-4 that is ~1e-12 in
// any probability, which silently wipes out derivative estimates
// taken by perturbing one phase. Within kPhaseGap the evaluation
// therefore switches to the Erlang-2 form at the midpoint rate: it
// is exact when the rates coincide, its directional derivative along
// either phase matches the true one there (the distribution is
// symmetric under swapping the phases), and its value error off the
// diagonal is below gap^2/4 relative, ~2.5e-7 at the band edge.
struct Hypoexponential {
    double rate1;
    double rate2;
    static constexpr double kPhaseGap = 1e-3;
};

// Unit step at `value`: the event fires after a fixed delay.
struct Deterministic {
    double value;
};

using Distribution = std::variant<Exponential, Hypoexponential, Deterministic>;

enum class Family { Exponential, Hypoexponential, Deterministic };

inline Distribution exponential(double rate) {
    if (!(rate > 0.0) || !std::isfinite(rate))
        throw ConfigError("exponential rate must be positive and finite");
    return Exponential{rate};
}

inline Distribution exponential_with_mean(double mean) {
    if (!(mean > 0.0) || !std::isfinite(mean))
        throw ConfigError("exponential mean must be positive and finite");
    return Exponential{1.0 / mean};
}

inline Distribution hypoexponential(double rate1, double rate2) {
    if (!(rate1 > 0.0) || !(rate2 > 0.0) || !std::isfinite(rate1) || !std::isfinite(rate2))
        throw ConfigError("hypoexponential phase rates must be positive and finite");
    return Hypoexponential{rate1, rate2};
}

inline Distribution deterministic(double value) {
    if (!(value > 0.0) || !std::isfinite(value))
        throw ConfigError("deterministic value must be positive and finite");
    return Deterministic{value};
}

inline Family family(const Distribution& d) {
    if (std::holds_alternative<Exponential>(d)) return Family::Exponential;
    if (std::holds_alternative<Hypoexponential>(d)) return Family::Hypoexponential;
    return Family::Deterministic;
}

inline bool is_exponential(const Distribution& d) { return std::holds_alternative<Exponential>(d); }
inline bool is_deterministic(const Distribution& d) { return std::holds_alternative<Deterministic>(d); }

namespace detail {

inline bool erlang_regime(const Hypoexponential& h) {
    return std::fabs(h.rate1 - h.rate2) <= Hypoexponential::kPhaseGap * std::fmax(h.rate1, h.rate2);
}

} // namespace detail

inline double mean(const Distribution& d) {
    struct V {
        double operator()(const Exponential& e) const { return 1.0 / e.rate; }
        double operator()(const Hypoexponential& h) const { return 1.0 / h.rate1 + 1.0 / h.rate2; }
        double operator()(const Deterministic& c) const { return c.value; }
    };
    return std::visit(V{}, d);
}

inline double cdf(const Distribution& d, double t) {
    if (t < 0.0) return 0.0;
    struct V {
        double t;
        double operator()(const Exponential& e) const { return -std::expm1(-e.rate * t); }
        double operator()(const Hypoexponential& h) const {
            if (detail::erlang_regime(h)) {
                double lam = 0.5 * (h.rate1 + h.rate2);
                double x = lam * t;
                return -std::expm1(-x) - x * std::exp(-x);
            }
            // (l2*(1-e^{-l1 t}) - l1*(1-e^{-l2 t})) / (l2 - l1); the
            // expm1 form keeps the small-t limit l1*l2*t^2/2 intact.
            double a = h.rate2 * (-std::expm1(-h.rate1 * t));
            double b = h.rate1 * (-std::expm1(-h.rate2 * t));
            return (a - b) / (h.rate2 - h.rate1);
        }
        double operator()(const Deterministic& c) const { return t >= c.value ? 1.0 : 0.0; }
    };
    return std::visit(V{t}, d);
}

inline double survival(const Distribution& d, double t) {
    if (t < 0.0) return 1.0;
    struct V {
        double t;
        double operator()(const Exponential& e) const { return std::exp(-e.rate * t); }
        double operator()(const Hypoexponential& h) const {
            if (detail::erlang_regime(h)) {
                double x = 0.5 * (h.rate1 + h.rate2) * t;
                return std::exp(-x) * (1.0 + x);
            }
            return (h.rate2 * std::exp(-h.rate1 * t) - h.rate1 * std::exp(-h.rate2 * t)) /
                   (h.rate2 - h.rate1);
        }
        double operator()(const Deterministic& c) const { return t >= c.value ? 0.0 : 1.0; }
    };
    return std::visit(V{t}, d);
}

// Density of the absolutely continuous part; zero for the point mass.
inline double density(const Distribution& d, double t) {
    if (t < 0.0) return 0.0;
    struct V {
        double t;
        double operator()(const Exponential& e) const { return e.rate * std::exp(-e.rate * t); }
        double operator()(const Hypoexponential& h) const {
            if (detail::erlang_regime(h)) {
                double lam = 0.5 * (h.rate1 + h.rate2);
                return lam * lam * t * std::exp(-lam * t);
            }
            return h.rate1 * h.rate2 / (h.rate2 - h.rate1) *
                   (std::exp(-h.rate1 * t) - std::exp(-h.rate2 * t));
        }
        double operator()(const Deterministic&) const { return 0.0; }
    };
    return std::visit(V{t}, d);
}

// Smallest t with F(t) >= p. Bisection fallback for the two-phase case.
inline double quantile(const Distribution& d, double p) {
    if (!(p >= 0.0) || !(p < 1.0))
        throw std::domain_error("quantile requires p in [0, 1)");
    struct V {
        double p;
        const Distribution& self;
        double operator()(const Exponential& e) const { return -std::log1p(-p) / e.rate; }
        double operator()(const Hypoexponential& h) const {
            if (p == 0.0) return 0.0;
            double hi = (1.0 / h.rate1 + 1.0 / h.rate2);
            while (cdf(self, hi) < p) hi *= 2.0;
            double lo = 0.0;
            for (int i = 0; i < 200; ++i) {
                double mid = 0.5 * (lo + hi);
                if (cdf(self, mid) < p) lo = mid; else hi = mid;
            }
            return 0.5 * (lo + hi);
        }
        double operator()(const Deterministic& c) const { return p == 0.0 ? 0.0 : c.value; }
    };
    return std::visit(V{p, d}, d);
}

inline double sample(const Distribution& d, RngStream& g) {
    struct V {
        RngStream& g;
        double operator()(const Exponential& e) const { return sample_exp1(g) / e.rate; }
        double operator()(const Hypoexponential& h) const {
            return sample_exp1(g) / h.rate1 + sample_exp1(g) / h.rate2;
        }
        double operator()(const Deterministic& c) const { return c.value; }
    };
    return std::visit(V{g}, d);
}

// Replaces the distribution with one of the target family having the
// same mean. Hypoexponential targets use equal phases.
inline Distribution mean_matched(const Distribution& d, Family target) {
    double m = mean(d);
    switch (target) {
        case Family::Exponential: return exponential_with_mean(m);
        case Family::Hypoexponential: return hypoexponential(2.0 / m, 2.0 / m);
        case Family::Deterministic: return deterministic(m);
    }
    throw std::logic_error("unknown family");
}

inline std::string describe(const Distribution& d) {
    struct V {
        std::string operator()(const Exponential& e) const {
            return "exp(rate=" + std::to_string(e.rate) + "/h)";
        }
        std::string operator()(const Hypoexponential& h) const {
            return "hypo(rates=" + std::to_string(h.rate1) + "," + std::to_string(h.rate2) + "/h)";
        }
        std::string operator()(const Deterministic& c) const {
            return "det(" + std::to_string(c.value) + "h)";
        }
    };
    return std::visit(V{}, d);
}

} // namespace smpdep
