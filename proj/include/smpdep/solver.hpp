#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "smpdep/kernel.hpp"

namespace smpdep {

// Steady-state and time-to-failure analysis of the chain. The
// embedded jump chain is solved for its stationary visit shares v,
// time weighting by the mean sojourns h turns those into state
// probabilities pi, and availability is the up-state mass. The
// absorbing variant counts expected visits per up state until the
// service first leaves the up-set, giving the mean time to failure.

struct SmpSolution {
    Eigen::MatrixXd tpm;
    Eigen::VectorXd v;  // stationary visit shares of the jump chain
    Eigen::VectorXd h;  // mean sojourn per visit (hours)
    Eigen::VectorXd pi; // steady-state probability
    double availability = 0.0;
    // Down-state mass accumulated directly rather than as 1 - A: the
    // sum of a handful of tiny positive terms keeps full relative
    // precision, which downstream sensitivity differencing relies on.
    double unavailability = 0.0;
    std::vector<int> dropped; // states outside the recurrent class
};

struct AbsorbingSolution {
    Eigen::MatrixXd tpm;      // substochastic, over `order`
    Eigen::VectorXd visits;   // expected visits until absorption
    Eigen::VectorXd sojourn;  // mean sojourn per visit (hours)
    double mttf = 0.0;
    std::vector<int> order;   // state ids: healthy, then unstable states
};

struct Evaluation {
    SmpSolution smp;
    AbsorbingSolution absorbing;
};

struct SolverOptions {
    bool escalation = true;
    KernelEvalSettings kernel{};
};

// States that communicate with `origin` (reachable from it and able to
// return), i.e. its recurrent class when the chain has one.
inline std::vector<int> communicating_class(const Eigen::MatrixXd& p, int origin) {
    const int n = static_cast<int>(p.rows());
    auto bfs = [&](bool forward) {
        std::vector<char> seen(n, 0);
        std::vector<int> stack{origin};
        seen[origin] = 1;
        while (!stack.empty()) {
            int s = stack.back();
            stack.pop_back();
            for (int t = 0; t < n; ++t) {
                double w = forward ? p(s, t) : p(t, s);
                if (t != s && w > 0.0 && !seen[t]) {
                    seen[t] = 1;
                    stack.push_back(t);
                }
            }
        }
        return seen;
    };
    std::vector<char> fwd = bfs(true), bwd = bfs(false);
    std::vector<int> out;
    for (int s = 0; s < n; ++s)
        if (fwd[s] && bwd[s]) out.push_back(s);
    return out;
}

// Stationary distribution of an irreducible row-stochastic matrix:
// the unique normalized v with v P = v, solved directly with one
// balance equation swapped for the normalization.
inline Eigen::VectorXd edtmc_stationary(const Eigen::MatrixXd& p) {
    const int n = static_cast<int>(p.rows());
    if (p.cols() != n) throw std::invalid_argument("matrix must be square");
    for (int s = 0; s < n; ++s)
        if (std::fabs(p.row(s).sum() - 1.0) > 1e-9)
            throw StructuralError("row " + std::to_string(s) + " is not stochastic (sums to " +
                                  std::to_string(p.row(s).sum()) + ")");
    std::vector<int> cls = communicating_class(p, 0);
    if (static_cast<int>(cls.size()) != n) {
        std::string missing;
        for (int s = 0; s < n; ++s)
            if (std::find(cls.begin(), cls.end(), s) == cls.end())
                missing += (missing.empty() ? "" : ", ") + std::to_string(s);
        throw StructuralError("chain is reducible; states {" + missing +
                              "} do not communicate with state 0");
    }

    Eigen::MatrixXd sys = p.transpose() - Eigen::MatrixXd::Identity(n, n);
    sys.row(n - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs(n - 1) = 1.0;
    Eigen::VectorXd v = sys.fullPivLu().solve(rhs);

    // An irreducible stationary vector is strictly positive; entries
    // can only come out negative through rounding, and only at
    // negligible magnitude.
    for (int s = 0; s < n; ++s) {
        if (v(s) < -1e-12)
            throw NumericalError("stationary solve produced negative mass at state " +
                                 std::to_string(s));
        v(s) = std::max(v(s), 0.0);
    }
    v /= v.sum();
    double residual = (p.transpose() * v - v).cwiseAbs().maxCoeff();
    if (!v.allFinite() || residual > 1e-12)
        throw NumericalError("stationary solve residual " + std::to_string(residual) +
                             " exceeds 1e-12");
    return v;
}

// Time-stationary probabilities from visit shares and mean sojourns.
inline Eigen::VectorXd steady_state(const Eigen::VectorXd& v, const Eigen::VectorXd& h) {
    if (v.size() != h.size()) throw std::invalid_argument("v and h must have equal length");
    for (int i = 0; i < h.size(); ++i)
        if (!(h(i) > 0.0) || !std::isfinite(h(i)))
            throw std::invalid_argument("sojourn vector must be positive and finite");
    Eigen::VectorXd w = v.cwiseProduct(h);
    return w / w.sum();
}

inline double availability(const Eigen::VectorXd& pi, const std::vector<int>& up) {
    double a = 0.0;
    for (int s : up) {
        if (s < 0 || s >= pi.size()) throw std::invalid_argument("up-state index out of range");
        a += pi(s);
    }
    return a;
}

// Expected visits per transient state until absorption, starting from
// `start` with one certain initial visit: V = alpha + V P'. Solved two
// ways and cross-checked: the direct linear system, and the closed
// form available because every excursion returns to the start state
// before the next departure (the transient chain is a star):
//
//     V_start = 1 / (1 - sum_i p'_{start,i} p'_{i,start}),
//     V_i     = p'_{start,i} V_start.
enum class VisitMethod { LinearSystem, ClosedForm };

inline Eigen::VectorXd expected_visits_by(const Eigen::MatrixXd& p, int start, VisitMethod method) {
    const int n = static_cast<int>(p.rows());
    if (method == VisitMethod::ClosedForm) {
        double loop = 0.0;
        for (int i = 0; i < n; ++i)
            if (i != start) loop += p(start, i) * p(i, start);
        double denom = 1.0 - loop;
        if (!(denom > 0.0))
            throw StructuralError("absorption unreachable: every departure returns");
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i) v(i) = i == start ? 1.0 / denom : p(start, i) / denom;
        return v;
    }
    Eigen::MatrixXd sys = Eigen::MatrixXd::Identity(n, n) - p.transpose();
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
    alpha(start) = 1.0;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sys);
    if (!lu.isInvertible())
        throw StructuralError("absorption unreachable: visit system is singular");
    Eigen::VectorXd v = lu.solve(alpha);
    if (!v.allFinite() || v.minCoeff() < 0.0)
        throw NumericalError("visit solve produced negative counts");
    return v;
}

inline Eigen::VectorXd expected_visits(const Eigen::MatrixXd& p, int start) {
    const int n = static_cast<int>(p.rows());
    for (int s = 0; s < n; ++s) {
        double sum = p.row(s).sum();
        if (sum > 1.0 + 1e-9 || p.row(s).minCoeff() < 0.0)
            throw StructuralError("visit matrix row " + std::to_string(s) +
                                  " is not substochastic");
    }
    Eigen::VectorXd linear = expected_visits_by(p, start, VisitMethod::LinearSystem);
    Eigen::VectorXd closed = expected_visits_by(p, start, VisitMethod::ClosedForm);
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        worst = std::fmax(worst, std::fabs(linear(i) - closed(i)) / std::fmax(1.0, std::fabs(closed(i))));
    // Both routes lose relative precision in proportion to the visit
    // count itself: V_start = 1/(1 - loop mass) amplifies the epsilon-
    // level rounding of the loop sum. Scale the agreement bound with
    // that conditioning so near-perfect systems (visit counts of 1e9+)
    // do not trip it, while ordinary configurations stay pinned at
    // 1e-10.
    double tol = std::fmax(1e-10, 32.0 * std::numeric_limits<double>::epsilon() *
                                      std::fmax(1.0, closed(start)));
    if (worst > tol)
        throw NumericalError("visit-count routes disagree by relative " + std::to_string(worst));
    if (linear(start) < 1.0 - 1e-12)
        throw NumericalError("start state must be visited at least once");
    return linear;
}

inline double mttf_from(const Eigen::VectorXd& visits, const Eigen::VectorXd& sojourn) {
    if (visits.size() != sojourn.size())
        throw std::invalid_argument("visits and sojourns must have equal length");
    return visits.dot(sojourn);
}

// Steady-state half of the pipeline: transition table, one-step
// matrix, stationary solve on the recurrent class of the healthy
// state. Topologies too small to reach some recovery levels simply
// leave those states at probability zero (reported in `dropped`).
inline SmpSolution solve_steady_state(const Topology& topo, const ParameterSet& params,
                                      const SolverOptions& options = {}) {
    KernelModel full = build_full_kernel(topo, params, options.escalation);
    const StateSpace& ss = full.space;
    const int n = ss.size();
    const int s0 = ss.index_of(StateKind::Perfect);
    Eigen::MatrixXd tpm = one_step_tpm(full, options.kernel);

    std::vector<int> cls = communicating_class(tpm, s0);
    std::vector<int> pos(n, -1);
    for (std::size_t a = 0; a < cls.size(); ++a) pos[cls[a]] = static_cast<int>(a);
    const int r = static_cast<int>(cls.size());

    Eigen::MatrixXd pr(r, r);
    for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b) pr(a, b) = tpm(cls[a], cls[b]);
    // Restriction cannot lose mass off the class: leaving a recurrent
    // class is impossible, so rows still sum to one.
    Eigen::VectorXd vr = edtmc_stationary(pr);

    Eigen::VectorXd hr(r);
    for (int a = 0; a < r; ++a) hr(a) = mean_sojourn(full, cls[a], options.kernel);
    Eigen::VectorXd pir = steady_state(vr, hr);

    SmpSolution smp;
    smp.tpm = std::move(tpm);
    smp.v = Eigen::VectorXd::Zero(n);
    smp.h = Eigen::VectorXd::Zero(n);
    smp.pi = Eigen::VectorXd::Zero(n);
    for (int a = 0; a < r; ++a) {
        smp.v(cls[a]) = vr(a);
        smp.h(cls[a]) = hr(a);
        smp.pi(cls[a]) = pir(a);
    }
    for (int s = 0; s < n; ++s)
        if (pos[s] < 0) smp.dropped.push_back(s);
    double down = 0.0;
    for (int s = 0; s < n; ++s)
        if (!ss.is_up(s)) down += smp.pi(s);
    smp.unavailability = down;
    smp.availability = 1.0 - down;
    return smp;
}

// Absorbing half: failure-free walk over the up states, expected
// visit counts, mean time to the first down excursion.
inline AbsorbingSolution solve_time_to_failure(const Topology& topo, const ParameterSet& params,
                                               const SolverOptions& options = {}) {
    KernelModel abs = build_absorbing_kernel(topo, params);
    const StateSpace& ss = abs.space;
    const int n = ss.size();
    const int s0 = ss.index_of(StateKind::Perfect);

    AbsorbingSolution ab;
    ab.order = ss.up_states();
    const int u = static_cast<int>(ab.order.size());
    ab.tpm = Eigen::MatrixXd::Zero(u, u);
    std::vector<int> upos(n, -1);
    for (int a = 0; a < u; ++a) upos[ab.order[a]] = a;
    for (int s : ab.order)
        for (const auto& tr : abs.rows[s].transitions)
            ab.tpm(upos[s], upos[tr.target]) +=
                transition_probability(abs, tr, options.kernel);
    ab.visits = expected_visits(ab.tpm, upos[s0]);
    ab.sojourn = Eigen::VectorXd(u);
    for (int a = 0; a < u; ++a) ab.sojourn(a) = mean_sojourn(abs, ab.order[a], options.kernel);
    ab.mttf = mttf_from(ab.visits, ab.sojourn);
    return ab;
}

inline Evaluation evaluate(const Topology& topo, const ParameterSet& params,
                           const SolverOptions& options = {}) {
    return {solve_steady_state(topo, params, options),
            solve_time_to_failure(topo, params, options)};
}

} // namespace smpdep
