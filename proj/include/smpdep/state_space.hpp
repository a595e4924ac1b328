#pragma once

#include <string>
#include <vector>

#include "smpdep/errors.hpp"
#include "smpdep/topology.hpp"

namespace smpdep {

// System states of the chain. `member` is the 1-based component or
// host index for the per-member kinds and 0 for the global ones.
enum class StateKind {
    Perfect,          // everything healthy
    Failed,           // unrecoverable crash, awaiting repair
    SfSystemRestart,  // restarting every SF
    VmSystemRestart,  // restarting every SF and VM
    VmmSystemReboot,  // rebooting every host
    SfUnstable,       // SF i aging
    VmUnstable,       // VM i aging
    VmmUnstable,      // VMM j aging
    VmPortionRestart, // restarting SF i together with VM i
    SfHostRestart,    // restarting the SFs on host j
    VmHostRestart,    // restarting the SFs and VMs on host j
    VmmHostReboot,    // rebooting host j
};

struct State {
    StateKind kind;
    int member;
};

// Component condition entries used in status reports.
enum class Condition : char { Healthy = 'P', Unstable = 'U', Recovering = 'R', Crashed = 'F' };

struct StatusVector {
    std::vector<Condition> sf, vm, vmm;
};

// Fixed enumeration of the state space for a given topology:
//   0..4            global states in the order above
//   5..4+m          SF unstable, per component
//   5+m..4+2m       VM unstable
//   5+2m..4+2m+n    VMM unstable
//   then VM portion restart (m), SF host restart (n),
//   VM host restart (n), host reboot (n); total 5 + 3m + 4n.
// The service is up in Perfect and in every unstable state: an aging
// component still serves traffic until recovery or failure begins.
class StateSpace {
public:
    explicit StateSpace(const Topology& topo) : topo_(topo) {
        const int m = topo.num_sfs(), n = topo.num_hosts();
        states_.reserve(5 + 3 * m + 4 * n);
        states_.push_back({StateKind::Perfect, 0});
        states_.push_back({StateKind::Failed, 0});
        states_.push_back({StateKind::SfSystemRestart, 0});
        states_.push_back({StateKind::VmSystemRestart, 0});
        states_.push_back({StateKind::VmmSystemReboot, 0});
        for (int i = 1; i <= m; ++i) states_.push_back({StateKind::SfUnstable, i});
        for (int i = 1; i <= m; ++i) states_.push_back({StateKind::VmUnstable, i});
        for (int j = 1; j <= n; ++j) states_.push_back({StateKind::VmmUnstable, j});
        for (int i = 1; i <= m; ++i) states_.push_back({StateKind::VmPortionRestart, i});
        for (int j = 1; j <= n; ++j) states_.push_back({StateKind::SfHostRestart, j});
        for (int j = 1; j <= n; ++j) states_.push_back({StateKind::VmHostRestart, j});
        for (int j = 1; j <= n; ++j) states_.push_back({StateKind::VmmHostReboot, j});
    }

    int size() const { return static_cast<int>(states_.size()); }
    const State& state(int idx) const { return states_[idx]; }
    const Topology& topology() const { return topo_; }

    int index_of(StateKind kind, int member = 0) const {
        const int m = topo_.num_sfs(), n = topo_.num_hosts();
        switch (kind) {
            case StateKind::Perfect: return 0;
            case StateKind::Failed: return 1;
            case StateKind::SfSystemRestart: return 2;
            case StateKind::VmSystemRestart: return 3;
            case StateKind::VmmSystemReboot: return 4;
            case StateKind::SfUnstable: return 4 + member;
            case StateKind::VmUnstable: return 4 + m + member;
            case StateKind::VmmUnstable: return 4 + 2 * m + member;
            case StateKind::VmPortionRestart: return 4 + 2 * m + n + member;
            case StateKind::SfHostRestart: return 4 + 3 * m + n + member;
            case StateKind::VmHostRestart: return 4 + 3 * m + 2 * n + member;
            case StateKind::VmmHostReboot: return 4 + 3 * m + 3 * n + member;
        }
        throw std::logic_error("unknown state kind");
    }

    bool is_up(int idx) const {
        switch (states_[idx].kind) {
            case StateKind::Perfect:
            case StateKind::SfUnstable:
            case StateKind::VmUnstable:
            case StateKind::VmmUnstable: return true;
            default: return false;
        }
    }

    std::vector<int> up_states() const {
        std::vector<int> out;
        for (int i = 0; i < size(); ++i)
            if (is_up(i)) out.push_back(i);
        return out;
    }

    std::string label(int idx) const {
        const State& s = states_[idx];
        const std::string i = std::to_string(s.member);
        switch (s.kind) {
            case StateKind::Perfect: return "PERFECT";
            case StateKind::Failed: return "FAILED";
            case StateKind::SfSystemRestart: return "SF_SYSTEM_RESTART";
            case StateKind::VmSystemRestart: return "VM_SYSTEM_RESTART";
            case StateKind::VmmSystemReboot: return "VMM_SYSTEM_REBOOT";
            case StateKind::SfUnstable: return "SF" + i + "_UNSTABLE";
            case StateKind::VmUnstable: return "VM" + i + "_UNSTABLE";
            case StateKind::VmmUnstable: return "VMM" + i + "_UNSTABLE";
            case StateKind::VmPortionRestart: return "VM" + i + "_PORTION_RESTART";
            case StateKind::SfHostRestart: return "HOST" + i + "_SF_RESTART";
            case StateKind::VmHostRestart: return "HOST" + i + "_SF_VM_RESTART";
            case StateKind::VmmHostReboot: return "HOST" + i + "_REBOOT";
        }
        throw std::logic_error("unknown state kind");
    }

    StatusVector status(int idx) const {
        const int m = topo_.num_sfs(), n = topo_.num_hosts();
        StatusVector sv;
        sv.sf.assign(m, Condition::Healthy);
        sv.vm.assign(m, Condition::Healthy);
        sv.vmm.assign(n, Condition::Healthy);
        auto host_members = [&](int j, StatusVector& v, bool vms, bool vmms) {
            for (int k : topo_.vms_on(j)) {
                v.sf[k - 1] = Condition::Recovering;
                if (vms) v.vm[k - 1] = Condition::Recovering;
            }
            if (vmms) v.vmm[j - 1] = Condition::Recovering;
        };
        const State& s = states_[idx];
        switch (s.kind) {
            case StateKind::Perfect: break;
            case StateKind::Failed:
                sv.sf.assign(m, Condition::Crashed);
                sv.vm.assign(m, Condition::Crashed);
                sv.vmm.assign(n, Condition::Crashed);
                break;
            case StateKind::SfSystemRestart:
                sv.sf.assign(m, Condition::Recovering);
                break;
            case StateKind::VmSystemRestart:
                sv.sf.assign(m, Condition::Recovering);
                sv.vm.assign(m, Condition::Recovering);
                break;
            case StateKind::VmmSystemReboot:
                sv.sf.assign(m, Condition::Recovering);
                sv.vm.assign(m, Condition::Recovering);
                sv.vmm.assign(n, Condition::Recovering);
                break;
            case StateKind::SfUnstable: sv.sf[s.member - 1] = Condition::Unstable; break;
            case StateKind::VmUnstable: sv.vm[s.member - 1] = Condition::Unstable; break;
            case StateKind::VmmUnstable: sv.vmm[s.member - 1] = Condition::Unstable; break;
            case StateKind::VmPortionRestart:
                sv.sf[s.member - 1] = Condition::Recovering;
                sv.vm[s.member - 1] = Condition::Recovering;
                break;
            case StateKind::SfHostRestart: host_members(s.member, sv, false, false); break;
            case StateKind::VmHostRestart: host_members(s.member, sv, true, false); break;
            case StateKind::VmmHostReboot: host_members(s.member, sv, true, true); break;
        }
        return sv;
    }

private:
    Topology topo_;
    std::vector<State> states_;
};

} // namespace smpdep
