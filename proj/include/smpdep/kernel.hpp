#pragma once

#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "smpdep/distribution.hpp"
#include "smpdep/exponomial.hpp"
#include "smpdep/parameters.hpp"
#include "smpdep/quadrature.hpp"
#include "smpdep/state_space.hpp"

namespace smpdep {

// The chain is a semi-Markov process driven by competing clocks: on
// entering a state every listed clock restarts, the earliest firing
// wins and selects the next state. The kernel entry for a transition is
//
//     K_{s,t}(x) = integral over [0, x] of
//                  f_trigger(tau) * prod_{other clocks} S_c(tau) dtau
//
// and the one-step probability is its limit at infinity. Aggregate
// aging clocks (sums of exponential rates) arise when several
// components' aging all lead to the same recovery action; the minimum
// of independent exponentials is exponential at the summed rate, so
// one clock represents the group exactly.
//
// Ties between two deterministic clocks firing at the same instant are
// broken by clock list order (first listed wins). Continuous clocks
// tie with probability zero.

struct Clock {
    Distribution dist;
    std::string symbol;
};

// Rule that generated a transition; printed in the audit dump.
enum class TransitionRule {
    Aging,                // healthy state, one component starts aging
    Failover,             // unstable SF/VM handed over, back to healthy
    Migration,            // VMs migrated off an unstable VMM
    Failure,              // unstable component crashes the service
    PairAging,            // the co-located partner of an unstable component ages
    PeerAgingSameHost,    // another component on the same host ages
    PeerAgingOtherHosts,  // a component on a different host ages
    OwnHostVmmAging,      // the VMM under an unstable component ages
    OwnHostAging,         // a component on an unstable VMM's host ages
    OtherVmmAging,        // a VMM on a different host ages
    Escalation,           // deeper aging interrupts a running recovery
    Recovery,             // restart/reboot/repair completes
};

inline const char* rule_name(TransitionRule r) {
    switch (r) {
        case TransitionRule::Aging: return "aging";
        case TransitionRule::Failover: return "failover";
        case TransitionRule::Migration: return "migration";
        case TransitionRule::Failure: return "failure";
        case TransitionRule::PairAging: return "pair-aging";
        case TransitionRule::PeerAgingSameHost: return "peer-aging-same-host";
        case TransitionRule::PeerAgingOtherHosts: return "peer-aging-other-hosts";
        case TransitionRule::OwnHostVmmAging: return "own-host-vmm-aging";
        case TransitionRule::OwnHostAging: return "own-host-aging";
        case TransitionRule::OtherVmmAging: return "other-vmm-aging";
        case TransitionRule::Escalation: return "escalation";
        case TransitionRule::Recovery: return "recovery";
    }
    return "?";
}

struct Transition {
    int source;
    int target;
    int clock; // index into the source row's clock list
    TransitionRule rule;
};

struct KernelRow {
    std::vector<Clock> clocks;
    std::vector<Transition> transitions;
};

enum class KernelVariant { Full, Absorbing };

struct KernelModel {
    KernelVariant variant;
    StateSpace space;
    std::vector<KernelRow> rows; // indexed by state
};

namespace detail {

struct RowBuilder {
    KernelRow* row;
    int source;

    int add_clock(Distribution d, std::string symbol) {
        row->clocks.push_back({std::move(d), std::move(symbol)});
        return static_cast<int>(row->clocks.size()) - 1;
    }
    void edge(int clock, int target, TransitionRule rule) {
        row->transitions.push_back({source, target, clock, rule});
    }
    // Aggregate of exponential aging rates; skipped when empty.
    int add_aggregate(const ParameterSet& p, const std::vector<int>& sfs,
                      const std::vector<int>& vms, const std::vector<int>& vmms) {
        double rate = 0.0;
        std::string symbol;
        auto append = [&](const char* name, int idx, double r) {
            if (!symbol.empty()) symbol += "+";
            symbol += std::string(name) + "[" + std::to_string(idx) + "]";
            rate += r;
        };
        for (int k : sfs) append("sf_aging", k, std::get<Exponential>(p.sf[k - 1].aging).rate);
        for (int k : vms) append("vm_aging", k, std::get<Exponential>(p.vm[k - 1].aging).rate);
        for (int k : vmms) append("vmm_aging", k, std::get<Exponential>(p.vmm[k - 1].aging).rate);
        if (rate == 0.0) return -1;
        return add_clock(Exponential{rate}, symbol);
    }
};

inline std::string sym(const char* name, int idx) {
    return std::string(name) + "[" + std::to_string(idx) + "]";
}

// Unstable-state rows share their structure between the two variants:
// the full model routes every clock to its target, the absorbing model
// keeps the same clock set but only the return edge (everything else
// leaves the up-set and absorbs).
inline void build_unstable_rows(KernelModel& km, const Topology& topo, const ParameterSet& p,
                                bool full) {
    const StateSpace& ss = km.space;
    const int m = topo.num_sfs(), n = topo.num_hosts();
    const int s0 = ss.index_of(StateKind::Perfect);
    const int failed = ss.index_of(StateKind::Failed);

    for (int i = 1; i <= m; ++i) {
        int u = topo.host_of(i);
        std::vector<int> peers = topo.peers_same_host(i);
        std::vector<int> others = topo.components_other_hosts(u);
        std::vector<int> other_vmms = topo.hosts_other(u);
        {
            int s = ss.index_of(StateKind::SfUnstable, i);
            RowBuilder b{&km.rows[s], s};
            int trig = b.add_clock(p.sf[i - 1].failover, sym("sf_failover", i));
            b.edge(trig, s0, TransitionRule::Failover);
            int fail = b.add_clock(p.sf[i - 1].failure, sym("sf_failure", i));
            int pair = b.add_clock(p.vm[i - 1].aging, sym("vm_aging", i));
            int peer_sf = b.add_aggregate(p, peers, {}, {});
            int peer_vm = b.add_aggregate(p, {}, peers, {});
            int far_sf = b.add_aggregate(p, others, {}, {});
            int far_vm = b.add_aggregate(p, {}, others, {});
            int own_vmm = b.add_clock(p.vmm[u - 1].aging, sym("vmm_aging", u));
            int far_vmm = b.add_aggregate(p, {}, {}, other_vmms);
            if (full) {
                b.edge(fail, failed, TransitionRule::Failure);
                b.edge(pair, ss.index_of(StateKind::VmPortionRestart, i), TransitionRule::PairAging);
                if (peer_sf >= 0)
                    b.edge(peer_sf, ss.index_of(StateKind::SfHostRestart, u),
                           TransitionRule::PeerAgingSameHost);
                if (peer_vm >= 0)
                    b.edge(peer_vm, ss.index_of(StateKind::VmHostRestart, u),
                           TransitionRule::PeerAgingSameHost);
                if (far_sf >= 0)
                    b.edge(far_sf, ss.index_of(StateKind::SfSystemRestart),
                           TransitionRule::PeerAgingOtherHosts);
                if (far_vm >= 0)
                    b.edge(far_vm, ss.index_of(StateKind::VmSystemRestart),
                           TransitionRule::PeerAgingOtherHosts);
                b.edge(own_vmm, ss.index_of(StateKind::VmmHostReboot, u),
                       TransitionRule::OwnHostVmmAging);
                if (far_vmm >= 0)
                    b.edge(far_vmm, ss.index_of(StateKind::VmmSystemReboot),
                           TransitionRule::OtherVmmAging);
            }
        }
        {
            int s = ss.index_of(StateKind::VmUnstable, i);
            RowBuilder b{&km.rows[s], s};
            int trig = b.add_clock(p.vm[i - 1].failover, sym("vm_failover", i));
            b.edge(trig, s0, TransitionRule::Failover);
            int fail = b.add_clock(p.vm[i - 1].failure, sym("vm_failure", i));
            int pair = b.add_clock(p.sf[i - 1].aging, sym("sf_aging", i));
            int peer_both = b.add_aggregate(p, peers, peers, {});
            int far_both = b.add_aggregate(p, others, others, {});
            int own_vmm = b.add_clock(p.vmm[u - 1].aging, sym("vmm_aging", u));
            int far_vmm = b.add_aggregate(p, {}, {}, other_vmms);
            if (full) {
                b.edge(fail, failed, TransitionRule::Failure);
                b.edge(pair, ss.index_of(StateKind::VmPortionRestart, i), TransitionRule::PairAging);
                if (peer_both >= 0)
                    b.edge(peer_both, ss.index_of(StateKind::VmHostRestart, u),
                           TransitionRule::PeerAgingSameHost);
                if (far_both >= 0)
                    b.edge(far_both, ss.index_of(StateKind::VmSystemRestart),
                           TransitionRule::PeerAgingOtherHosts);
                b.edge(own_vmm, ss.index_of(StateKind::VmmHostReboot, u),
                       TransitionRule::OwnHostVmmAging);
                if (far_vmm >= 0)
                    b.edge(far_vmm, ss.index_of(StateKind::VmmSystemReboot),
                           TransitionRule::OtherVmmAging);
            }
        }
    }
    for (int j = 1; j <= n; ++j) {
        int s = ss.index_of(StateKind::VmmUnstable, j);
        RowBuilder b{&km.rows[s], s};
        int trig = b.add_clock(p.vmm[j - 1].migration, sym("vmm_migration", j));
        b.edge(trig, s0, TransitionRule::Migration);
        int fail = b.add_clock(p.vmm[j - 1].failure, sym("vmm_failure", j));
        const std::vector<int>& own = topo.vms_on(j);
        std::vector<int> far = topo.components_other_hosts(j);
        std::vector<int> other_vmms = topo.hosts_other(j);
        int own_pairs = b.add_aggregate(p, own, own, {});
        int far_all = b.add_aggregate(p, far, far, other_vmms);
        if (full) {
            b.edge(fail, failed, TransitionRule::Failure);
            if (own_pairs >= 0)
                b.edge(own_pairs, ss.index_of(StateKind::VmmHostReboot, j),
                       TransitionRule::OwnHostAging);
            if (far_all >= 0)
                b.edge(far_all, ss.index_of(StateKind::VmmSystemReboot),
                       TransitionRule::OtherVmmAging);
        }
    }
}

inline void build_perfect_row(KernelModel& km, const Topology& topo, const ParameterSet& p) {
    const StateSpace& ss = km.space;
    int s0 = ss.index_of(StateKind::Perfect);
    RowBuilder b{&km.rows[s0], s0};
    for (int i = 1; i <= topo.num_sfs(); ++i) {
        int c = b.add_clock(p.sf[i - 1].aging, sym("sf_aging", i));
        b.edge(c, ss.index_of(StateKind::SfUnstable, i), TransitionRule::Aging);
    }
    for (int i = 1; i <= topo.num_sfs(); ++i) {
        int c = b.add_clock(p.vm[i - 1].aging, sym("vm_aging", i));
        b.edge(c, ss.index_of(StateKind::VmUnstable, i), TransitionRule::Aging);
    }
    for (int j = 1; j <= topo.num_hosts(); ++j) {
        int c = b.add_clock(p.vmm[j - 1].aging, sym("vmm_aging", j));
        b.edge(c, ss.index_of(StateKind::VmmUnstable, j), TransitionRule::Aging);
    }
}

} // namespace detail

// Reliability-model kernel: only the healthy state and the unstable
// states have outgoing transitions; any departure that is not a return
// to the healthy state absorbs (a recovery or repair begins, i.e. the
// service leaves the up-set for the first time).
inline KernelModel build_absorbing_kernel(const Topology& topo, const ParameterSet& params) {
    params.validate(topo);
    KernelModel km{KernelVariant::Absorbing, StateSpace(topo), {}};
    km.rows.resize(km.space.size());
    detail::build_perfect_row(km, topo, params);
    detail::build_unstable_rows(km, topo, params, false);
    return km;
}

// Availability-model kernel over the complete state space. With
// `escalation` on (the default), aging that outpaces a running recovery
// widens the recovery: an SF-level restart escalates when any VM or
// VMM ages, a VM-level restart when any VMM ages, and the host-level
// analogues likewise on their own host.
inline KernelModel build_full_kernel(const Topology& topo, const ParameterSet& params,
                                     bool escalation = true) {
    params.validate(topo);
    KernelModel km{KernelVariant::Full, StateSpace(topo), {}};
    km.rows.resize(km.space.size());
    const StateSpace& ss = km.space;
    const int s0 = ss.index_of(StateKind::Perfect);
    detail::build_perfect_row(km, topo, params);
    detail::build_unstable_rows(km, topo, params, true);

    auto recovery = [&](StateKind kind, int member, const Distribution& d, std::string symbol) {
        int s = ss.index_of(kind, member);
        detail::RowBuilder b{&km.rows[s], s};
        int c = b.add_clock(d, std::move(symbol));
        b.edge(c, s0, TransitionRule::Recovery);
        return s;
    };

    recovery(StateKind::Failed, 0, params.system.repair, "repair");
    int srs = recovery(StateKind::SfSystemRestart, 0, params.system.restart_all_sfs,
                       "restart_all_sfs");
    int srv = recovery(StateKind::VmSystemRestart, 0, params.system.restart_all_sfs_vms,
                       "restart_all_sfs_vms");
    recovery(StateKind::VmmSystemReboot, 0, params.system.reboot_all, "reboot_all");
    for (int i = 1; i <= topo.num_sfs(); ++i)
        recovery(StateKind::VmPortionRestart, i, params.vm[i - 1].restart,
                 detail::sym("vm_restart", i));
    std::vector<int> shr(topo.num_hosts() + 1), vhr(topo.num_hosts() + 1);
    for (int j = 1; j <= topo.num_hosts(); ++j) {
        shr[j] = recovery(StateKind::SfHostRestart, j, params.host[j - 1].restart_sfs,
                          detail::sym("host_restart_sfs", j));
        vhr[j] = recovery(StateKind::VmHostRestart, j, params.host[j - 1].restart_sfs_vms,
                          detail::sym("host_restart_sfs_vms", j));
        recovery(StateKind::VmmHostReboot, j, params.host[j - 1].reboot,
                 detail::sym("host_reboot", j));
    }

    if (escalation) {
        auto all = [&](int count) {
            std::vector<int> v(count);
            for (int k = 0; k < count; ++k) v[k] = k + 1;
            return v;
        };
        {
            detail::RowBuilder b{&km.rows[srs], srs};
            int aav = b.add_aggregate(params, {}, all(topo.num_sfs()), {});
            if (aav >= 0)
                b.edge(aav, ss.index_of(StateKind::VmSystemRestart), TransitionRule::Escalation);
            int aam = b.add_aggregate(params, {}, {}, all(topo.num_hosts()));
            if (aam >= 0)
                b.edge(aam, ss.index_of(StateKind::VmmSystemReboot), TransitionRule::Escalation);
        }
        {
            detail::RowBuilder b{&km.rows[srv], srv};
            int aam = b.add_aggregate(params, {}, {}, all(topo.num_hosts()));
            if (aam >= 0)
                b.edge(aam, ss.index_of(StateKind::VmmSystemReboot), TransitionRule::Escalation);
        }
        for (int j = 1; j <= topo.num_hosts(); ++j) {
            {
                detail::RowBuilder b{&km.rows[shr[j]], shr[j]};
                int avh = b.add_aggregate(params, {}, topo.vms_on(j), {});
                if (avh >= 0)
                    b.edge(avh, ss.index_of(StateKind::VmHostRestart, j),
                           TransitionRule::Escalation);
                int am = b.add_clock(params.vmm[j - 1].aging, detail::sym("vmm_aging", j));
                b.edge(am, ss.index_of(StateKind::VmmHostReboot, j), TransitionRule::Escalation);
            }
            {
                detail::RowBuilder b{&km.rows[vhr[j]], vhr[j]};
                int am = b.add_clock(params.vmm[j - 1].aging, detail::sym("vmm_aging", j));
                b.edge(am, ss.index_of(StateKind::VmmHostReboot, j), TransitionRule::Escalation);
            }
        }
    }
    return km;
}

// Evaluation settings for kernel integrals. Analytic closed forms are
// the default; quadrature is the independent cross-check route.
enum class EvalMode { Analytic, Quadrature };

struct KernelEvalSettings {
    EvalMode mode = EvalMode::Analytic;
    QuadratureSettings quad{};
    double truncation_quantile = 1e-13; // tail mass allowed past the cutoff
};

namespace detail {

struct SplitClocks {
    std::vector<const Distribution*> continuous;
    double det_min = std::numeric_limits<double>::infinity();
    int det_min_clock = -1;
};

inline SplitClocks split_clocks(const KernelRow& row, int skip_clock) {
    SplitClocks out;
    for (int c = 0; c < static_cast<int>(row.clocks.size()); ++c) {
        if (c == skip_clock) continue;
        const Distribution& d = row.clocks[c].dist;
        if (const auto* dc = std::get_if<Deterministic>(&d)) {
            if (dc->value < out.det_min) {
                out.det_min = dc->value;
                out.det_min_clock = c;
            }
        } else {
            out.continuous.push_back(&d);
        }
    }
    return out;
}

inline double quad_upper(const KernelRow& row, double truncation_quantile) {
    double upper = std::numeric_limits<double>::infinity();
    for (const auto& c : row.clocks)
        upper = std::fmin(upper, quantile(c.dist, 1.0 - truncation_quantile));
    return upper;
}

} // namespace detail

// K_{source,target}(t): probability the transition's trigger fires
// first and does so within t.
inline double kernel_entry(const KernelModel& km, const Transition& tr, double t,
                           const KernelEvalSettings& settings = {}) {
    if (t < 0.0) throw std::domain_error("kernel_entry requires t >= 0");
    const KernelRow& row = km.rows[tr.source];
    const Clock& trig = row.clocks[tr.clock];
    detail::SplitClocks rest = detail::split_clocks(row, tr.clock);

    if (const auto* dc = std::get_if<Deterministic>(&trig.dist)) {
        double d = dc->value;
        if (d > t) return 0.0;
        if (rest.det_min < d) return 0.0;
        if (rest.det_min == d && rest.det_min_clock < tr.clock) return 0.0;
        double prod = 1.0;
        for (const auto* cd : rest.continuous) prod *= survival(*cd, d);
        return prod;
    }

    double upper = std::fmin(t, rest.det_min);
    if (upper <= 0.0) return 0.0;

    if (settings.mode == EvalMode::Analytic) {
        Exponomial integrand = Exponomial::density_of(trig.dist);
        for (const auto* cd : rest.continuous) integrand *= Exponomial::survival_of(*cd);
        return integrand.integral(upper);
    }
    // Truncate where every clock's survival is already below the
    // allowed tail mass; an unbounded or overlong interval can defeat
    // the adaptive rule by hiding the integrand's support.
    double cap = std::fmin(upper, detail::quad_upper(row, settings.truncation_quantile));
    auto f = [&](double tau) {
        double v = density(trig.dist, tau);
        for (const auto* cd : rest.continuous) v *= survival(*cd, tau);
        return v;
    };
    return integrate_adaptive(f, 0.0, cap, settings.quad).value;
}

inline double transition_probability(const KernelModel& km, const Transition& tr,
                                     const KernelEvalSettings& settings = {}) {
    return kernel_entry(km, tr, std::numeric_limits<double>::infinity(), settings);
}

// Mean time spent in a state per visit: the integral of the survival
// product of every clock in the row.
inline double mean_sojourn(const KernelModel& km, int state,
                           const KernelEvalSettings& settings = {}) {
    const KernelRow& row = km.rows[state];
    if (row.clocks.empty())
        throw StructuralError("state " + km.space.label(state) + " has no clocks");
    detail::SplitClocks parts = detail::split_clocks(row, -1);

    if (settings.mode == EvalMode::Analytic) {
        Exponomial integrand = Exponomial::one();
        for (const auto* cd : parts.continuous) integrand *= Exponomial::survival_of(*cd);
        double h = integrand.integral(parts.det_min);
        if (!std::isfinite(h))
            throw StructuralError("state " + km.space.label(state) + " has divergent sojourn");
        return h;
    }
    double cap = std::fmin(parts.det_min, detail::quad_upper(row, settings.truncation_quantile));
    if (!std::isfinite(cap))
        throw StructuralError("state " + km.space.label(state) + " has divergent sojourn");
    auto f = [&](double tau) {
        double v = 1.0;
        for (const auto* cd : parts.continuous) v *= survival(*cd, tau);
        return v;
    };
    return integrate_adaptive(f, 0.0, cap, settings.quad).value;
}

// One-step transition probability matrix, the kernel's limit in time.
// Full-variant rows must sum to 1; a violation beyond 1e-9 means the
// transition table itself is inconsistent and is reported as such.
inline Eigen::MatrixXd one_step_tpm(const KernelModel& km, const KernelEvalSettings& settings = {}) {
    const int n = km.space.size();
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
    for (int s = 0; s < n; ++s) {
        const KernelRow& row = km.rows[s];
        double sum = 0.0;
        for (const auto& tr : row.transitions) {
            double v = transition_probability(km, tr, settings);
            p(s, tr.target) += v;
            sum += v;
        }
        if (km.variant == KernelVariant::Full && !row.transitions.empty() &&
            std::fabs(sum - 1.0) > 1e-9)
            throw StructuralError("transition table inconsistent: row " + km.space.label(s) +
                                  " sums to " + std::to_string(sum));
        if (sum > 1.0 + 1e-9)
            throw StructuralError("row " + km.space.label(s) + " exceeds probability 1");
    }
    return p;
}

// Audit dump of the transition table.
inline void dump_transitions(const KernelModel& km, std::ostream& os) {
    os << "source\ttarget\ttrigger\tcompetitors\tprovenance\n";
    for (const auto& row : km.rows) {
        for (const auto& tr : row.transitions) {
            os << km.space.label(tr.source) << "\t" << km.space.label(tr.target) << "\t"
               << row.clocks[tr.clock].symbol << "\t";
            bool first = true;
            for (int c = 0; c < static_cast<int>(row.clocks.size()); ++c) {
                if (c == tr.clock) continue;
                if (!first) os << ",";
                os << row.clocks[c].symbol;
                first = false;
            }
            if (first) os << "-";
            os << "\t" << rule_name(tr.rule) << "\n";
        }
    }
}

} // namespace smpdep
