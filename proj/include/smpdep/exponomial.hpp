#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "smpdep/distribution.hpp"
#include "smpdep/specfun.hpp"

namespace smpdep {

// Closed-form integration domain for the kernel math. Survival and
// density functions of the exponential and two-phase families are
// finite sums of c * t^k * e^{-a t}; the family is closed under
// products, so the competing-clock integrands
//
//     f_trigger(t) * prod_c S_c(t)
//
// stay inside it and integrate exactly via the regularized incomplete
// gamma. This keeps kernel entries smooth in the parameters, which
// matters for finite-difference sensitivities: adaptive quadrature is
// accurate but its subdivision noise is far larger than the smallest
// sensitivities being resolved. Point masses are not representable and
// are handled by the caller through domain truncation and point
// evaluation.

struct ExpoTerm {
    int k;     // power of t, >= 0
    double a;  // decay rate, >= 0
    double c;  // coefficient
};

class Exponomial {
public:
    Exponomial() = default;
    explicit Exponomial(std::vector<ExpoTerm> terms) : terms_(std::move(terms)) { normalize(); }

    static Exponomial one() { return Exponomial({{0, 0.0, 1.0}}); }

    static Exponomial survival_of(const Distribution& d) {
        if (const auto* e = std::get_if<Exponential>(&d))
            return Exponomial({{0, e->rate, 1.0}});
        if (const auto* h = std::get_if<Hypoexponential>(&d)) {
            if (detail::erlang_regime(*h)) {
                double lam = 0.5 * (h->rate1 + h->rate2);
                return Exponomial({{0, lam, 1.0}, {1, lam, lam}});
            }
            double delta = h->rate2 - h->rate1;
            return Exponomial({{0, h->rate1, h->rate2 / delta}, {0, h->rate2, -h->rate1 / delta}});
        }
        throw std::logic_error("no exponomial survival for a point mass");
    }

    static Exponomial density_of(const Distribution& d) {
        if (const auto* e = std::get_if<Exponential>(&d))
            return Exponomial({{0, e->rate, e->rate}});
        if (const auto* h = std::get_if<Hypoexponential>(&d)) {
            if (detail::erlang_regime(*h)) {
                double lam = 0.5 * (h->rate1 + h->rate2);
                return Exponomial({{1, lam, lam * lam}});
            }
            double q = h->rate1 * h->rate2 / (h->rate2 - h->rate1);
            return Exponomial({{0, h->rate1, q}, {0, h->rate2, -q}});
        }
        throw std::logic_error("no exponomial density for a point mass");
    }

    Exponomial operator*(const Exponomial& o) const {
        std::vector<ExpoTerm> out;
        out.reserve(terms_.size() * o.terms_.size());
        for (const auto& p : terms_)
            for (const auto& q : o.terms_)
                out.push_back({p.k + q.k, p.a + q.a, p.c * q.c});
        return Exponomial(std::move(out));
    }

    Exponomial& operator*=(const Exponomial& o) { return *this = *this * o; }

    double value(double t) const {
        double s = 0.0;
        for (const auto& tm : terms_) s += tm.c * std::pow(t, tm.k) * std::exp(-tm.a * t);
        return s;
    }

    // Integral over [0, upper]; upper may be +infinity.
    double integral(double upper) const {
        double s = 0.0;
        for (const auto& tm : terms_) s += term_integral(tm, upper);
        return s;
    }

    const std::vector<ExpoTerm>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

private:
    static double factorial(int k) {
        double f = 1.0;
        for (int i = 2; i <= k; ++i) f *= i;
        return f;
    }

    static double term_integral(const ExpoTerm& tm, double upper) {
        if (tm.a == 0.0) {
            if (!std::isfinite(upper))
                return tm.c == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
            return tm.c * std::pow(upper, tm.k + 1) / (tm.k + 1);
        }
        double full = tm.c * factorial(tm.k) / std::pow(tm.a, tm.k + 1);
        if (!std::isfinite(upper)) return full;
        return full * gamma_p(tm.k + 1, tm.a * upper);
    }

    void normalize() {
        std::sort(terms_.begin(), terms_.end(), [](const ExpoTerm& x, const ExpoTerm& y) {
            if (x.a != y.a) return x.a < y.a;
            return x.k < y.k;
        });
        std::vector<ExpoTerm> merged;
        for (const auto& tm : terms_) {
            if (!merged.empty() && merged.back().a == tm.a && merged.back().k == tm.k)
                merged.back().c += tm.c;
            else
                merged.push_back(tm);
        }
        merged.erase(std::remove_if(merged.begin(), merged.end(),
                                    [](const ExpoTerm& t) { return t.c == 0.0; }),
                     merged.end());
        terms_ = std::move(merged);
    }

    std::vector<ExpoTerm> terms_;
};

} // namespace smpdep
