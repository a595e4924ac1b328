#pragma once

#include <string>
#include <vector>

#include "smpdep/errors.hpp"

namespace smpdep {

// Deployment shape of the chain: m service functions, each in its own
// VM (SF i runs in VM i), VMs placed on n hosts, one virtual machine
// monitor per host. Components and hosts are 1-based everywhere; the
// aggregate queries below are the index sets the transition builder
// sums aging rates over.
class Topology {
public:
    Topology(int num_sfs, int num_hosts, std::vector<int> host_of_vm)
        : m_(num_sfs), n_(num_hosts), host_of_(std::move(host_of_vm)) {
        if (m_ < 1) throw ConfigError("topology.num_sfs", "must be at least 1");
        if (n_ < 1) throw ConfigError("topology.num_hosts", "must be at least 1");
        if (static_cast<int>(host_of_.size()) != m_)
            throw ConfigError("topology.vm_host_assignment",
                              "needs one host id per VM (" + std::to_string(m_) + " entries)");
        vms_on_.assign(n_ + 1, {});
        for (int i = 1; i <= m_; ++i) {
            int h = host_of_[i - 1];
            if (h < 1 || h > n_)
                throw ConfigError("topology.vm_host_assignment",
                                  "host id " + std::to_string(h) + " out of range 1.." +
                                      std::to_string(n_));
            vms_on_[h].push_back(i);
        }
        for (int j = 1; j <= n_; ++j)
            if (vms_on_[j].empty())
                throw ConfigError("topology.vm_host_assignment",
                                  "host " + std::to_string(j) + " hosts no VM");
    }

    // Even placement: contiguous blocks, earlier hosts take the
    // remainder. m=5, n=2 gives hosts {1,2,3} and {4,5}.
    static Topology even(int num_sfs, int num_hosts) {
        if (num_sfs < 1 || num_hosts < 1 || num_hosts > num_sfs)
            throw ConfigError("topology", "need 1 <= num_hosts <= num_sfs for even placement");
        std::vector<int> host_of(num_sfs);
        int base = num_sfs / num_hosts, extra = num_sfs % num_hosts, vm = 0;
        for (int j = 1; j <= num_hosts; ++j) {
            int count = base + (j <= extra ? 1 : 0);
            for (int k = 0; k < count; ++k) host_of[vm++] = j;
        }
        return Topology(num_sfs, num_hosts, std::move(host_of));
    }

    int num_sfs() const { return m_; }
    int num_hosts() const { return n_; }
    int host_of(int vm) const { return host_of_[vm - 1]; }
    const std::vector<int>& vms_on(int host) const { return vms_on_[host]; }

    // Same-host companions of component i, excluding i itself.
    std::vector<int> peers_same_host(int i) const {
        std::vector<int> out;
        for (int k : vms_on_[host_of(i)])
            if (k != i) out.push_back(k);
        return out;
    }

    // Components placed on any host other than `host`.
    std::vector<int> components_other_hosts(int host) const {
        std::vector<int> out;
        for (int i = 1; i <= m_; ++i)
            if (host_of(i) != host) out.push_back(i);
        return out;
    }

    std::vector<int> hosts_other(int host) const {
        std::vector<int> out;
        for (int j = 1; j <= n_; ++j)
            if (j != host) out.push_back(j);
        return out;
    }

private:
    int m_, n_;
    std::vector<int> host_of_;
    std::vector<std::vector<int>> vms_on_;
};

} // namespace smpdep
