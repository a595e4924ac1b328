#pragma once

#include <functional>
#include <string>
#include <vector>

#include "smpdep/distribution.hpp"
#include "smpdep/errors.hpp"
#include "smpdep/topology.hpp"

namespace smpdep {

// Time units accepted in configs. Internal unit is hours throughout.
enum class TimeUnit { Seconds, Minutes, Hours, Days };

inline double to_hours(double value, TimeUnit unit) {
    switch (unit) {
        case TimeUnit::Seconds: return value / 3600.0;
        case TimeUnit::Minutes: return value / 60.0;
        case TimeUnit::Hours: return value;
        case TimeUnit::Days: return value * 24.0;
    }
    throw std::logic_error("unknown unit");
}

struct Duration {
    double value;
    TimeUnit unit;
    double hours() const { return to_hours(value, unit); }
};

// Per-component timing parameters. Aging must be exponential (the
// model's clocks restart on every state change, and only a memoryless
// aging clock makes that equivalent to continuous degradation);
// failure and recovery distributions are unrestricted.
struct SfParams {
    Distribution aging, failure, failover;
};
struct VmParams {
    Distribution aging, failure, failover, restart;
};
struct VmmParams {
    Distribution aging, failure, migration;
};
struct HostParams {
    Distribution restart_sfs, restart_sfs_vms, reboot;
};
struct SystemParams {
    Distribution restart_all_sfs, restart_all_sfs_vms, reboot_all, repair;
};

struct ParameterSet {
    std::vector<SfParams> sf;    // size m
    std::vector<VmParams> vm;    // size m
    std::vector<VmmParams> vmm;  // size n
    std::vector<HostParams> host; // size n
    SystemParams system;

    void validate(const Topology& topo) const;
    static ParameterSet defaults(const Topology& topo);
};

// Default timing table (midpoints of the validated operating ranges).
// Kept as value+unit pairs so that generated config files and the
// in-process defaults convert through the same code path and agree
// bit for bit.
namespace defaults {
inline constexpr Duration kSfAgingMean{10.0, TimeUnit::Days};
inline constexpr Duration kSfFailurePhase{3.5, TimeUnit::Days};  // two equal phases, total 7 d
inline constexpr Duration kSfFailoverMean{9.5, TimeUnit::Seconds};
inline constexpr Duration kVmAgingMean{16.0, TimeUnit::Days};
inline constexpr Duration kVmFailurePhase{8.0, TimeUnit::Days};  // total 16 d
inline constexpr Duration kVmFailoverMean{16.0, TimeUnit::Seconds};
inline constexpr Duration kVmRestartMean{12.0, TimeUnit::Seconds};
inline constexpr Duration kVmmAgingMean{22.5, TimeUnit::Days};
inline constexpr Duration kVmmFailurePhase{15.5, TimeUnit::Days}; // total 31 d
inline constexpr Duration kVmmMigrationMean{30.5, TimeUnit::Seconds};
inline constexpr Duration kHostRestartSfsMean{30.5, TimeUnit::Seconds};
inline constexpr Duration kHostRestartSfsVmsMean{45.5, TimeUnit::Seconds};
inline constexpr Duration kHostRebootMean{1.05, TimeUnit::Minutes};
inline constexpr Duration kSystemRestartSfsMean{1.05, TimeUnit::Minutes};
inline constexpr Duration kSystemRestartSfsVmsMean{2.05, TimeUnit::Minutes};
inline constexpr Duration kSystemRebootMean{3.05, TimeUnit::Minutes};
inline constexpr Duration kRepairMean{0.9, TimeUnit::Hours};
} // namespace defaults

inline ParameterSet ParameterSet::defaults(const Topology& topo) {
    using namespace smpdep::defaults;
    auto exp_of = [](Duration d) { return exponential_with_mean(d.hours()); };
    auto hypo_of = [](Duration phase) {
        double r = 1.0 / phase.hours();
        return hypoexponential(r, r);
    };
    ParameterSet p;
    p.sf.assign(topo.num_sfs(),
                {exp_of(kSfAgingMean), hypo_of(kSfFailurePhase), exp_of(kSfFailoverMean)});
    p.vm.assign(topo.num_sfs(), {exp_of(kVmAgingMean), hypo_of(kVmFailurePhase),
                                 exp_of(kVmFailoverMean), exp_of(kVmRestartMean)});
    p.vmm.assign(topo.num_hosts(),
                 {exp_of(kVmmAgingMean), hypo_of(kVmmFailurePhase), exp_of(kVmmMigrationMean)});
    p.host.assign(topo.num_hosts(), {exp_of(kHostRestartSfsMean), exp_of(kHostRestartSfsVmsMean),
                                     exp_of(kHostRebootMean)});
    p.system = {exp_of(kSystemRestartSfsMean), exp_of(kSystemRestartSfsVmsMean),
                exp_of(kSystemRebootMean), exp_of(kRepairMean)};
    return p;
}

inline void ParameterSet::validate(const Topology& topo) const {
    auto expect = [](std::size_t actual, int want, const char* field) {
        if (actual != static_cast<std::size_t>(want))
            throw ConfigError(std::string("parameters.") + field,
                              "expected " + std::to_string(want) + " entries, got " +
                                  std::to_string(actual));
    };
    expect(sf.size(), topo.num_sfs(), "sf");
    expect(vm.size(), topo.num_sfs(), "vm");
    expect(vmm.size(), topo.num_hosts(), "vmm");
    expect(host.size(), topo.num_hosts(), "host");
    for (std::size_t i = 0; i < sf.size(); ++i)
        if (!is_exponential(sf[i].aging))
            throw ConfigError("parameters.sf." + std::to_string(i + 1) + ".aging",
                              "aging must be exponential");
    for (std::size_t i = 0; i < vm.size(); ++i)
        if (!is_exponential(vm[i].aging))
            throw ConfigError("parameters.vm." + std::to_string(i + 1) + ".aging",
                              "aging must be exponential");
    for (std::size_t j = 0; j < vmm.size(); ++j)
        if (!is_exponential(vmm[j].aging))
            throw ConfigError("parameters.vmm." + std::to_string(j + 1) + ".aging",
                              "aging must be exponential");
}

// True when every distribution in the set is exponential (the regime
// where the chain collapses to a CTMC and the cross-check oracle applies).
inline bool all_exponential(const ParameterSet& p) {
    for (const auto& s : p.sf)
        if (!is_exponential(s.aging) || !is_exponential(s.failure) || !is_exponential(s.failover))
            return false;
    for (const auto& v : p.vm)
        if (!is_exponential(v.aging) || !is_exponential(v.failure) ||
            !is_exponential(v.failover) || !is_exponential(v.restart))
            return false;
    for (const auto& w : p.vmm)
        if (!is_exponential(w.aging) || !is_exponential(w.failure) || !is_exponential(w.migration))
            return false;
    for (const auto& h : p.host)
        if (!is_exponential(h.restart_sfs) || !is_exponential(h.restart_sfs_vms) ||
            !is_exponential(h.reboot))
            return false;
    const auto& sys = p.system;
    return is_exponential(sys.restart_all_sfs) && is_exponential(sys.restart_all_sfs_vms) &&
           is_exponential(sys.reboot_all) && is_exponential(sys.repair);
}

// Swappable distribution groups for what-if studies. Failure covers the
// three failure clocks; Recovery covers failover, migration, restart,
// reboot and repair clocks. Aging stays exponential by model assumption.
enum class ParamGroup { Failure, Recovery };

inline ParameterSet with_family(ParameterSet p, ParamGroup group, Family target) {
    auto swap = [&](Distribution& d) { d = mean_matched(d, target); };
    if (group == ParamGroup::Failure) {
        for (auto& s : p.sf) swap(s.failure);
        for (auto& v : p.vm) swap(v.failure);
        for (auto& w : p.vmm) swap(w.failure);
    } else {
        for (auto& s : p.sf) swap(s.failover);
        for (auto& v : p.vm) {
            swap(v.failover);
            swap(v.restart);
        }
        for (auto& w : p.vmm) swap(w.migration);
        for (auto& h : p.host) {
            swap(h.restart_sfs);
            swap(h.restart_sfs_vms);
            swap(h.reboot);
        }
        swap(p.system.restart_all_sfs);
        swap(p.system.restart_all_sfs_vms);
        swap(p.system.reboot_all);
        swap(p.system.repair);
    }
    return p;
}

// Dotted-path access to scalar parameters, e.g. "sf.2.aging.rate",
// "vm.1.failure.phase2", "system.repair.rate", "vm.3.restart.value"
// (for deterministic entries). Used by the sensitivity and sweep
// front ends; "*" in the index position expands to every member.

struct ParamRef {
    std::string path;
    Distribution* dist;
    int field; // 0=rate, 1=phase1, 2=phase2, 3=value

    double get() const {
        switch (field) {
            case 0: return std::get<Exponential>(*dist).rate;
            case 1: return std::get<Hypoexponential>(*dist).rate1;
            case 2: return std::get<Hypoexponential>(*dist).rate2;
            default: return std::get<Deterministic>(*dist).value;
        }
    }
    void set(double v) const {
        if (!(v > 0.0) || !std::isfinite(v))
            throw ConfigError(path, "parameter value must be positive and finite");
        switch (field) {
            case 0: std::get<Exponential>(*dist).rate = v; break;
            case 1: std::get<Hypoexponential>(*dist).rate1 = v; break;
            case 2: std::get<Hypoexponential>(*dist).rate2 = v; break;
            default: std::get<Deterministic>(*dist).value = v; break;
        }
    }
};

namespace detail {

inline void each_distribution(ParameterSet& p,
                              const std::function<void(const std::string&, Distribution&)>& fn) {
    for (std::size_t i = 0; i < p.sf.size(); ++i) {
        std::string base = "sf." + std::to_string(i + 1) + ".";
        fn(base + "aging", p.sf[i].aging);
        fn(base + "failure", p.sf[i].failure);
        fn(base + "failover", p.sf[i].failover);
    }
    for (std::size_t i = 0; i < p.vm.size(); ++i) {
        std::string base = "vm." + std::to_string(i + 1) + ".";
        fn(base + "aging", p.vm[i].aging);
        fn(base + "failure", p.vm[i].failure);
        fn(base + "failover", p.vm[i].failover);
        fn(base + "restart", p.vm[i].restart);
    }
    for (std::size_t j = 0; j < p.vmm.size(); ++j) {
        std::string base = "vmm." + std::to_string(j + 1) + ".";
        fn(base + "aging", p.vmm[j].aging);
        fn(base + "failure", p.vmm[j].failure);
        fn(base + "migration", p.vmm[j].migration);
    }
    for (std::size_t j = 0; j < p.host.size(); ++j) {
        std::string base = "host." + std::to_string(j + 1) + ".";
        fn(base + "restart_sfs", p.host[j].restart_sfs);
        fn(base + "restart_sfs_vms", p.host[j].restart_sfs_vms);
        fn(base + "reboot", p.host[j].reboot);
    }
    fn("system.restart_all_sfs", p.system.restart_all_sfs);
    fn("system.restart_all_sfs_vms", p.system.restart_all_sfs_vms);
    fn("system.reboot_all", p.system.reboot_all);
    fn("system.repair", p.system.repair);
}

inline std::vector<ParamRef> fields_of(const std::string& base, Distribution& d) {
    std::vector<ParamRef> out;
    if (std::holds_alternative<Exponential>(d))
        out.push_back({base + ".rate", &d, 0});
    else if (std::holds_alternative<Hypoexponential>(d)) {
        out.push_back({base + ".phase1", &d, 1});
        out.push_back({base + ".phase2", &d, 2});
    } else {
        out.push_back({base + ".value", &d, 3});
    }
    return out;
}

} // namespace detail

// All scalar parameters of the set, in a stable documented order.
inline std::vector<ParamRef> list_params(ParameterSet& p) {
    std::vector<ParamRef> out;
    detail::each_distribution(p, [&](const std::string& base, Distribution& d) {
        for (auto& r : detail::fields_of(base, d)) out.push_back(r);
    });
    return out;
}

// Resolves one path, or several when the member index is "*".
inline std::vector<ParamRef> resolve_params(ParameterSet& p, const std::string& path) {
    std::vector<ParamRef> out;
    bool wildcard = path.find(".*.") != std::string::npos;
    for (auto& r : list_params(p)) {
        if (r.path == path) {
            out.push_back(r);
        } else if (wildcard) {
            // Compare with the member index masked out.
            std::string pat = path;
            std::string cand = r.path;
            auto mask = [](std::string s) {
                auto a = s.find('.');
                auto b = s.find('.', a + 1);
                if (a != std::string::npos && b != std::string::npos) s.replace(a + 1, b - a - 1, "*");
                return s;
            };
            if (mask(cand) == pat) out.push_back(r);
        }
    }
    if (out.empty()) throw ConfigError(path, "no such parameter");
    return out;
}

} // namespace smpdep
