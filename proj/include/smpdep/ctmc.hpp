#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "smpdep/errors.hpp"
#include "smpdep/parameters.hpp"
#include "smpdep/state_space.hpp"

namespace smpdep {

// Continuous-time Markov chain route, valid when every distribution is
// exponential. The generator is assembled directly from the rates, one
// switch per state kind, with no shared code with the kernel builder:
// it exists to cross-check that pipeline, so the structural rules are
// spelled out a second time on purpose.

namespace detail {

inline double exp_rate(const Distribution& d) { return std::get<Exponential>(d).rate; }

} // namespace detail

inline Eigen::MatrixXd ctmc_generator(const Topology& topo, const ParameterSet& p,
                                      bool escalation = true) {
    if (!all_exponential(p))
        throw ConfigError("the Markov-chain oracle requires exponential parameters");
    p.validate(topo);
    StateSpace ss(topo);
    const int m = topo.num_sfs(), n = topo.num_hosts(), N = ss.size();
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(N, N);

    auto rs = [&](int i) { return detail::exp_rate(p.sf[i - 1].aging); };
    auto rv = [&](int i) { return detail::exp_rate(p.vm[i - 1].aging); };
    auto rm = [&](int j) { return detail::exp_rate(p.vmm[j - 1].aging); };
    auto at = [&](StateKind k, int member = 0) { return ss.index_of(k, member); };
    auto add = [&](int from, int to, double rate) {
        if (rate != 0.0) q(from, to) += rate;
    };

    for (int i = 1; i <= m; ++i) add(at(StateKind::Perfect), at(StateKind::SfUnstable, i), rs(i));
    for (int i = 1; i <= m; ++i) add(at(StateKind::Perfect), at(StateKind::VmUnstable, i), rv(i));
    for (int j = 1; j <= n; ++j) add(at(StateKind::Perfect), at(StateKind::VmmUnstable, j), rm(j));

    for (int i = 1; i <= m; ++i) {
        int u = topo.host_of(i);
        double peer_sf = 0, peer_vm = 0, far_sf = 0, far_vm = 0, far_mm = 0;
        for (int k : topo.peers_same_host(i)) {
            peer_sf += rs(k);
            peer_vm += rv(k);
        }
        for (int k : topo.components_other_hosts(u)) {
            far_sf += rs(k);
            far_vm += rv(k);
        }
        for (int j : topo.hosts_other(u)) far_mm += rm(j);

        int s = at(StateKind::SfUnstable, i);
        add(s, at(StateKind::Perfect), detail::exp_rate(p.sf[i - 1].failover));
        add(s, at(StateKind::Failed), detail::exp_rate(p.sf[i - 1].failure));
        add(s, at(StateKind::VmPortionRestart, i), rv(i));
        add(s, at(StateKind::SfHostRestart, u), peer_sf);
        add(s, at(StateKind::VmHostRestart, u), peer_vm);
        add(s, at(StateKind::SfSystemRestart), far_sf);
        add(s, at(StateKind::VmSystemRestart), far_vm);
        add(s, at(StateKind::VmmHostReboot, u), rm(u));
        add(s, at(StateKind::VmmSystemReboot), far_mm);

        s = at(StateKind::VmUnstable, i);
        add(s, at(StateKind::Perfect), detail::exp_rate(p.vm[i - 1].failover));
        add(s, at(StateKind::Failed), detail::exp_rate(p.vm[i - 1].failure));
        add(s, at(StateKind::VmPortionRestart, i), rs(i));
        add(s, at(StateKind::VmHostRestart, u), peer_sf + peer_vm);
        add(s, at(StateKind::VmSystemRestart), far_sf + far_vm);
        add(s, at(StateKind::VmmHostReboot, u), rm(u));
        add(s, at(StateKind::VmmSystemReboot), far_mm);
    }

    for (int j = 1; j <= n; ++j) {
        double own = 0, far_all = 0;
        for (int k : topo.vms_on(j)) own += rs(k) + rv(k);
        for (int k : topo.components_other_hosts(j)) far_all += rs(k) + rv(k);
        for (int j2 : topo.hosts_other(j)) far_all += rm(j2);

        int s = at(StateKind::VmmUnstable, j);
        add(s, at(StateKind::Perfect), detail::exp_rate(p.vmm[j - 1].migration));
        add(s, at(StateKind::Failed), detail::exp_rate(p.vmm[j - 1].failure));
        add(s, at(StateKind::VmmHostReboot, j), own);
        add(s, at(StateKind::VmmSystemReboot), far_all);
    }

    add(at(StateKind::Failed), at(StateKind::Perfect), detail::exp_rate(p.system.repair));
    add(at(StateKind::SfSystemRestart), at(StateKind::Perfect),
        detail::exp_rate(p.system.restart_all_sfs));
    add(at(StateKind::VmSystemRestart), at(StateKind::Perfect),
        detail::exp_rate(p.system.restart_all_sfs_vms));
    add(at(StateKind::VmmSystemReboot), at(StateKind::Perfect),
        detail::exp_rate(p.system.reboot_all));
    for (int i = 1; i <= m; ++i)
        add(at(StateKind::VmPortionRestart, i), at(StateKind::Perfect),
            detail::exp_rate(p.vm[i - 1].restart));
    for (int j = 1; j <= n; ++j) {
        add(at(StateKind::SfHostRestart, j), at(StateKind::Perfect),
            detail::exp_rate(p.host[j - 1].restart_sfs));
        add(at(StateKind::VmHostRestart, j), at(StateKind::Perfect),
            detail::exp_rate(p.host[j - 1].restart_sfs_vms));
        add(at(StateKind::VmmHostReboot, j), at(StateKind::Perfect),
            detail::exp_rate(p.host[j - 1].reboot));
    }

    if (escalation) {
        double all_vm = 0, all_mm = 0;
        for (int i = 1; i <= m; ++i) all_vm += rv(i);
        for (int j = 1; j <= n; ++j) all_mm += rm(j);
        add(at(StateKind::SfSystemRestart), at(StateKind::VmSystemRestart), all_vm);
        add(at(StateKind::SfSystemRestart), at(StateKind::VmmSystemReboot), all_mm);
        add(at(StateKind::VmSystemRestart), at(StateKind::VmmSystemReboot), all_mm);
        for (int j = 1; j <= n; ++j) {
            double own_vm = 0;
            for (int k : topo.vms_on(j)) own_vm += rv(k);
            add(at(StateKind::SfHostRestart, j), at(StateKind::VmHostRestart, j), own_vm);
            add(at(StateKind::SfHostRestart, j), at(StateKind::VmmHostReboot, j), rm(j));
            add(at(StateKind::VmHostRestart, j), at(StateKind::VmmHostReboot, j), rm(j));
        }
    }

    for (int s = 0; s < N; ++s) q(s, s) = -q.row(s).sum();
    return q;
}

// Balance-equation steady state, restricted to the states reachable
// from `origin`; unreachable states get probability zero.
inline Eigen::VectorXd ctmc_steady_state(const Eigen::MatrixXd& q, int origin = 0) {
    const int n = static_cast<int>(q.rows());
    std::vector<int> reach;
    {
        std::vector<char> seen(n, 0);
        std::vector<int> stack{origin};
        seen[origin] = 1;
        while (!stack.empty()) {
            int s = stack.back();
            stack.pop_back();
            reach.push_back(s);
            for (int t = 0; t < n; ++t)
                if (t != s && q(s, t) > 0.0 && !seen[t]) {
                    seen[t] = 1;
                    stack.push_back(t);
                }
        }
        std::sort(reach.begin(), reach.end());
    }
    const int r = static_cast<int>(reach.size());
    Eigen::MatrixXd qr(r, r);
    for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b) qr(a, b) = q(reach[a], reach[b]);

    // pi Q = 0 with the last balance equation replaced by normalization.
    Eigen::MatrixXd sys = qr.transpose();
    sys.row(r - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(r);
    rhs(r - 1) = 1.0;
    Eigen::VectorXd sol = sys.fullPivLu().solve(rhs);
    double residual = (qr.transpose() * sol).cwiseAbs().maxCoeff();
    if (!sol.allFinite() || residual > 1e-9)
        throw NumericalError("steady-state solve residual " + std::to_string(residual));

    Eigen::VectorXd pi = Eigen::VectorXd::Zero(n);
    for (int a = 0; a < r; ++a) pi(reach[a]) = std::max(sol(a), 0.0);
    pi /= pi.sum();
    return pi;
}

// Mean absorption time from `start` when the chain leaves `transient`:
// solve (-Q_TT) tau = 1 (the fundamental-matrix route).
inline double ctmc_absorption_time(const Eigen::MatrixXd& q, const std::vector<int>& transient,
                                   int start) {
    const int r = static_cast<int>(transient.size());
    Eigen::MatrixXd t(r, r);
    int start_pos = -1;
    for (int a = 0; a < r; ++a) {
        if (transient[a] == start) start_pos = a;
        for (int b = 0; b < r; ++b) t(a, b) = q(transient[a], transient[b]);
    }
    if (start_pos < 0) throw std::invalid_argument("start state not in transient set");
    Eigen::FullPivLU<Eigen::MatrixXd> lu(-t);
    if (!lu.isInvertible())
        throw StructuralError("absorption unreachable: transient block is singular");
    Eigen::VectorXd tau = lu.solve(Eigen::VectorXd::Ones(r));
    if (!tau.allFinite() || tau.minCoeff() <= 0.0)
        throw NumericalError("absorption-time solve produced a non-positive time");
    return tau(start_pos);
}

inline double ctmc_availability(const Topology& topo, const ParameterSet& p,
                                bool escalation = true) {
    StateSpace ss(topo);
    Eigen::VectorXd pi = ctmc_steady_state(ctmc_generator(topo, p, escalation),
                                           ss.index_of(StateKind::Perfect));
    double a = 0.0;
    for (int s : ss.up_states()) a += pi(s);
    return a;
}

inline double ctmc_mttf(const Topology& topo, const ParameterSet& p) {
    StateSpace ss(topo);
    Eigen::MatrixXd q = ctmc_generator(topo, p, true);
    return ctmc_absorption_time(q, ss.up_states(), ss.index_of(StateKind::Perfect));
}

} // namespace smpdep
