#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace smpdep {

// Counter-based splittable generator (SplitMix64 core). Each logical
// stream is an independent window of the mixed counter sequence, so
// stream k of a given seed is reproducible regardless of how many
// draws other streams have consumed. That property is what makes
// simulation replications independent of scheduling order.
class RngStream {
public:
    RngStream() : state_(0) {}
    explicit RngStream(std::uint64_t init) : state_(init) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1], safe as a log() argument.
    double uniform_pos() { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

namespace detail {

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

} // namespace detail

// Derives the initial state of stream `stream` under `seed`. Double
// mixing decorrelates nearby seed/stream pairs.
inline RngStream make_stream(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t a = detail::mix64(seed);
    std::uint64_t b = detail::mix64(stream ^ 0xD6E8FEB86659FD93ull);
    return RngStream(detail::mix64(a ^ (b + 0x9E3779B97F4A7C15ull)));
}

// 256-layer ziggurat for the unit exponential. Tables are built once at
// startup by bisecting the base-layer coordinate until the layer stack
// closes exactly at zero; the converged constant is checked in tests
// against the published value 7.69711747013105.
class ExpZiggurat {
public:
    static const ExpZiggurat& instance() {
        static const ExpZiggurat z;
        return z;
    }

    double sample(RngStream& g) const {
        for (;;) {
            std::uint64_t z = g.next_u64();
            int i = static_cast<int>(z & 255u);
            double u = static_cast<double>(z >> 11) * 0x1.0p-53;
            if (i == 0) {
                double x = u * x_[0];
                if (x < r_) return x;
                // Base-strip overshoot maps to the analytic tail.
                return r_ - std::log1p(-g.uniform01());
            }
            double x = u * x_[i];
            if (x < x_[i + 1]) return x;
            double y = y_[i] + g.uniform01() * (y_[i + 1] - y_[i]);
            if (y < std::exp(-x)) return x;
        }
    }

    double base_edge() const { return r_; }

private:
    ExpZiggurat() {
        constexpr int n = 256;
        double lo = 5.0, hi = 10.0, r = 0.0;
        for (int it = 0; it < 200; ++it) {
            r = 0.5 * (lo + hi);
            double v = r * std::exp(-r) + std::exp(-r);
            double x = r, fx = std::exp(-r);
            bool over = false;
            for (int i = 1; i < n; ++i) {
                double fnext = fx + v / x;
                if (fnext >= 1.0) {
                    over = (i < n - 1);
                    fx = fnext;
                    break;
                }
                x = -std::log(fnext);
                fx = fnext;
            }
            double err = over ? 1.0 : fx - 1.0;
            if (err > 0) lo = r; else hi = r;
        }
        r_ = r;
        double v = r * std::exp(-r) + std::exp(-r);
        x_[1] = r;
        y_[1] = std::exp(-r);
        for (int i = 1; i < n; ++i) {
            double fnext = y_[i] + v / x_[i];
            if (fnext > 1.0) fnext = 1.0;
            x_[i + 1] = -std::log(fnext);
            y_[i + 1] = fnext;
        }
        if (!(x_[n] >= 0.0)) x_[n] = 0.0;
        x_[0] = v / std::exp(-r);
        y_[0] = 0.0;
    }

    std::array<double, 257> x_{};
    std::array<double, 257> y_{};
    double r_ = 0.0;
};

// Unit exponential draw. Exact: ziggurat rejection with analytic tail.
inline double sample_exp1(RngStream& g) { return ExpZiggurat::instance().sample(g); }

// Standard normal via the polar method. Used by the gamma sampler,
// which draws once per simulation replication, so speed is secondary.
inline double sample_normal(RngStream& g) {
    for (;;) {
        double a = 2.0 * g.uniform01() - 1.0;
        double b = 2.0 * g.uniform01() - 1.0;
        double s = a * a + b * b;
        if (s > 0.0 && s < 1.0) return a * std::sqrt(-2.0 * std::log(s) / s);
    }
}

// Gamma(shape, 1) via Marsaglia-Tsang squeeze; exact rejection sampler.
// shape >= 1 in our use (sum of n unit exponentials has shape n).
inline double sample_gamma(RngStream& g, double shape) {
    if (shape < 1.0) {
        // Boost by one and correct with a power of a uniform.
        double u = g.uniform_pos();
        return sample_gamma(g, shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    double d = shape - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = sample_normal(g);
        double t = 1.0 + c * x;
        if (t <= 0.0) continue;
        double v = t * t * t;
        double u = g.uniform_pos();
        double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
}

} // namespace smpdep
