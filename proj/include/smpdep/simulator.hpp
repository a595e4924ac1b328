#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <limits>
#include <stdexcept>
#include <thread>
#include <variant>
#include <vector>

#include "smpdep/kernel.hpp"
#include "smpdep/rng.hpp"

namespace smpdep {

// Monte-Carlo estimate with a 95% normal-approximation confidence
// interval. Bit-exactly reproducible from (seed, model, count): every
// cycle/replication owns the counter-based stream derived from its
// index, so neither thread count nor scheduling order can change the
// result. half_width is zero only for degenerate (variance-free)
// walks such as a single deterministic exit.
struct SimEstimate {
    double point = 0.0;
    double half_width = 0.0;
    long long count = 0;
    std::uint64_t seed = 0;
};

struct SimOptions {
    // <= 0: take SMPDEP_THREADS from the environment, falling back to
    // the hardware concurrency.
    int threads = 0;
};

// One simulated jump: the state entered (or -1 when the winning clock
// has no retained edge, i.e. the absorbing walk ends) and the dwell
// time spent before it fired.
struct SimStep {
    int target = -1;
    double dwell = 0.0;
};

// Jump tables lowered from a kernel. Exponential clocks in a row are
// collapsed into their aggregate rate: the minimum of independent
// exponentials is Exponential(sum of rates) and the winner's identity
// is categorical on the rates, independent of the minimum, so one
// draw replaces the whole block without changing the law. Remaining
// clocks (two-phase, deterministic) are sampled literally, in row
// order so that exact ties resolve like the analytic tie-break.
struct SimModel {
    struct Row {
        double exp_total = 0.0;
        std::vector<double> exp_rate;
        std::vector<int> exp_target;
        std::vector<Distribution> slow;
        std::vector<int> slow_target;
    };
    std::vector<Row> rows;
    std::vector<char> up;
    int start = 0;
};

inline SimModel lower_model(const KernelModel& km) {
    SimModel sm;
    const int n = km.space.size();
    sm.rows.resize(n);
    sm.up.resize(n);
    sm.start = km.space.index_of(StateKind::Perfect);
    for (int s = 0; s < n; ++s) {
        sm.up[s] = km.space.is_up(s) ? 1 : 0;
        const KernelRow& row = km.rows[s];
        std::vector<int> target(row.clocks.size(), -1);
        for (const auto& tr : row.transitions) target[tr.clock] = tr.target;
        for (std::size_t c = 0; c < row.clocks.size(); ++c) {
            const Distribution& d = row.clocks[c].dist;
            if (const auto* e = std::get_if<Exponential>(&d)) {
                sm.rows[s].exp_total += e->rate;
                sm.rows[s].exp_rate.push_back(e->rate);
                sm.rows[s].exp_target.push_back(target[c]);
            } else {
                sm.rows[s].slow.push_back(d);
                sm.rows[s].slow_target.push_back(target[c]);
            }
        }
    }
    return sm;
}

// Sample one SMP jump: every clock in the state is drawn fresh (the
// regeneration semantics the kernel integrals assume) and the
// minimum wins.
inline SimStep sim_step(const SimModel& sm, int state, RngStream& g) {
    const SimModel::Row& row = sm.rows[state];
    if (row.exp_total <= 0.0 && row.slow.empty())
        throw StructuralError("simulated walk entered a state with no clocks");
    double best = std::numeric_limits<double>::infinity();
    int target = -1;
    bool exp_won = false;
    if (row.exp_total > 0.0) {
        best = sample_exp1(g) / row.exp_total;
        exp_won = true;
    }
    for (std::size_t i = 0; i < row.slow.size(); ++i) {
        double t = sample(row.slow[i], g);
        if (t < best) {
            best = t;
            target = row.slow_target[i];
            exp_won = false;
        }
    }
    if (exp_won) {
        // Winner among the exponential block, categorical on rates;
        // drawn lazily because the identity is independent of `best`.
        double u = g.uniform01() * row.exp_total;
        double acc = 0.0;
        std::size_t j = 0;
        for (; j + 1 < row.exp_rate.size(); ++j) {
            acc += row.exp_rate[j];
            if (u < acc) break;
        }
        target = row.exp_target[j];
    }
    return {target, best};
}

namespace detail {

inline int resolve_threads(int requested, long long work) {
    int t = requested;
    if (t <= 0) {
        if (const char* env = std::getenv("SMPDEP_THREADS")) t = std::atoi(env);
        if (t <= 0) t = static_cast<int>(std::thread::hardware_concurrency());
        if (t <= 0) t = 1;
    }
    if (static_cast<long long>(t) > work) t = static_cast<int>(work);
    return t < 1 ? 1 : t;
}

// Run fn(index) for every index in [0, count) across threads, each
// index writing only its own output slot. Exceptions are rethrown on
// the caller thread.
template <class F>
void parallel_indexed(long long count, int threads, F&& fn) {
    if (threads <= 1) {
        for (long long k = 0; k < count; ++k) fn(k);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    const long long chunk = (count + threads - 1) / threads;
    for (int w = 0; w < threads; ++w) {
        const long long lo = w * chunk;
        const long long hi = std::min(count, lo + chunk);
        pool.emplace_back([&, w, lo, hi] {
            try {
                for (long long k = lo; k < hi; ++k) fn(k);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

constexpr double kZ95 = 1.959963984540054;

// Seeds for the two estimators are salted differently so that running
// both with the same user seed does not reuse streams.
constexpr std::uint64_t kMttfSalt = 0x9E3779B97F4A7C15ull;

} // namespace detail

// Regenerative availability estimation: the walk restarts
// statistically on every visit to the healthy state, so consecutive
// excursions are independent cycles and each can run on its own RNG
// stream. The ratio estimate (sum of up time)/(sum of cycle time)
// gets its confidence interval from the per-cycle residuals
// U_k - A*T_k.
inline SimEstimate simulate_availability(const KernelModel& km, long long cycles,
                                         std::uint64_t seed, const SimOptions& options = {}) {
    if (km.variant != KernelVariant::Full)
        throw std::invalid_argument("availability simulation needs the full kernel variant");
    if (cycles < 100) throw std::invalid_argument("need at least 100 regeneration cycles");

    const SimModel sm = lower_model(km);
    std::vector<double> up(cycles), total(cycles);
    detail::parallel_indexed(cycles, detail::resolve_threads(options.threads, cycles),
                             [&](long long k) {
                                 RngStream g = make_stream(seed, static_cast<std::uint64_t>(k));
                                 double t_sum = 0.0, u_sum = 0.0;
                                 int s = sm.start;
                                 do {
                                     SimStep st = sim_step(sm, s, g);
                                     if (st.target < 0)
                                         throw StructuralError(
                                             "full kernel row is missing an edge");
                                     t_sum += st.dwell;
                                     if (sm.up[s]) u_sum += st.dwell;
                                     s = st.target;
                                 } while (s != sm.start);
                                 up[k] = u_sum;
                                 total[k] = t_sum;
                             });

    double su = 0.0, st = 0.0;
    for (long long k = 0; k < cycles; ++k) {
        su += up[k];
        st += total[k];
    }
    const double ahat = su / st;
    double ss = 0.0;
    for (long long k = 0; k < cycles; ++k) {
        double d = up[k] - ahat * total[k];
        ss += d * d;
    }
    const double n = static_cast<double>(cycles);
    const double se = std::sqrt(ss / (n - 1.0) / n) / (st / n);
    return {ahat, detail::kZ95 * se, cycles, seed};
}

// Independent first-passage replications from the healthy state to
// absorption (the winning clock has no retained edge), averaged with
// a normal-approximation interval.
inline SimEstimate simulate_mttf(const KernelModel& km, long long replications,
                                 std::uint64_t seed, const SimOptions& options = {}) {
    if (km.variant != KernelVariant::Absorbing)
        throw std::invalid_argument("MTTF simulation needs the absorbing kernel variant");
    if (replications < 100) throw std::invalid_argument("need at least 100 replications");

    const SimModel sm = lower_model(km);
    std::vector<double> tau(replications);
    detail::parallel_indexed(replications,
                             detail::resolve_threads(options.threads, replications),
                             [&](long long r) {
                                 RngStream g = make_stream(seed ^ detail::kMttfSalt,
                                                           static_cast<std::uint64_t>(r));
                                 double t_sum = 0.0;
                                 int s = sm.start;
                                 while (true) {
                                     SimStep st = sim_step(sm, s, g);
                                     t_sum += st.dwell;
                                     if (st.target < 0) break;
                                     s = st.target;
                                 }
                                 tau[r] = t_sum;
                             });

    double sum = 0.0;
    for (long long r = 0; r < replications; ++r) sum += tau[r];
    const double mean = sum / static_cast<double>(replications);
    double ss = 0.0;
    for (long long r = 0; r < replications; ++r) {
        double d = tau[r] - mean;
        ss += d * d;
    }
    const double n = static_cast<double>(replications);
    const double se = std::sqrt(ss / (n - 1.0) / n);
    return {mean, detail::kZ95 * se, replications, seed};
}

} // namespace smpdep
