#pragma once

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "smpdep/parameters.hpp"
#include "smpdep/solver.hpp"
#include "smpdep/topology.hpp"

namespace smpdep {

struct SimulationConfig {
    long long cycles = 10000;
    long long replications = 10000;
    std::optional<std::uint64_t> seed;
};

struct RunConfig {
    Topology topology;
    ParameterSet params;
    SolverOptions solver{};
    SimulationConfig simulation{};
};

namespace cfgdetail {

using Json = nlohmann::ordered_json;

[[noreturn]] inline void fail(const std::string& path, const std::string& msg) {
    throw ConfigError(path, msg);
}

inline void expect_object(const Json& v, const std::string& path) {
    if (!v.is_object()) fail(path, "expected an object");
}

inline void expect_keys(const Json& obj, const std::string& path,
                        std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) known = true;
        if (!known) fail(path, "unknown key '" + it.key() + "'");
    }
}

inline const Json& require(const Json& obj, const std::string& path, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) fail(path + "." + key, "missing");
    return *it;
}

inline double number_at(const Json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
}

inline double positive_at(const Json& v, const std::string& path) {
    double x = number_at(v, path);
    if (!(x > 0.0) || !std::isfinite(x)) fail(path, "must be positive and finite");
    return x;
}

inline long long integer_at(const Json& v, const std::string& path) {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<long long>();
}

inline TimeUnit unit_of(const Json& obj, const std::string& path) {
    auto it = obj.find("unit");
    if (it == obj.end()) return TimeUnit::Hours;
    std::string u = it->is_string() ? it->get<std::string>() : std::string();
    if (u == "s") return TimeUnit::Seconds;
    if (u == "min") return TimeUnit::Minutes;
    if (u == "h") return TimeUnit::Hours;
    if (u == "d") return TimeUnit::Days;
    fail(path + ".unit", "expected one of \"s\", \"min\", \"h\", \"d\"");
}

inline const char* unit_name(TimeUnit u) {
    switch (u) {
        case TimeUnit::Seconds: return "s";
        case TimeUnit::Minutes: return "min";
        case TimeUnit::Hours: return "h";
        case TimeUnit::Days: return "d";
    }
    return "h";
}

// A clock entry. Times may be given as means in any supported unit;
// rate forms are per hour and take no unit key.
inline Distribution distribution_at(const Json& v, const std::string& path) {
    expect_object(v, path);
    auto fit = v.find("family");
    if (fit == v.end()) fail(path + ".family", "missing");
    std::string fam = fit->is_string() ? fit->get<std::string>() : std::string();

    if (fam == "exponential") {
        expect_keys(v, path, {"family", "mean", "rate", "unit"});
        bool has_mean = v.contains("mean"), has_rate = v.contains("rate");
        if (has_mean == has_rate) fail(path, "needs exactly one of \"mean\" or \"rate\"");
        if (has_rate && v.contains("unit"))
            fail(path + ".unit", "rates are per hour; \"unit\" applies to means only");
        if (has_rate) return exponential(positive_at(v["rate"], path + ".rate"));
        double m = positive_at(v["mean"], path + ".mean");
        return exponential_with_mean(to_hours(m, unit_of(v, path)));
    }
    if (fam == "hypoexponential") {
        expect_keys(v, path, {"family", "phase_means", "phase_rates", "unit"});
        bool has_means = v.contains("phase_means"), has_rates = v.contains("phase_rates");
        if (has_means == has_rates)
            fail(path, "needs exactly one of \"phase_means\" or \"phase_rates\"");
        const char* key = has_means ? "phase_means" : "phase_rates";
        const Json& arr = v[key];
        std::string apath = path + "." + key;
        if (!arr.is_array() || arr.size() != 2) fail(apath, "expected an array of two numbers");
        if (has_rates && v.contains("unit"))
            fail(path + ".unit", "rates are per hour; \"unit\" applies to means only");
        double a = positive_at(arr[0], apath + ".1");
        double b = positive_at(arr[1], apath + ".2");
        if (has_rates) return hypoexponential(a, b);
        TimeUnit u = unit_of(v, path);
        return hypoexponential(1.0 / to_hours(a, u), 1.0 / to_hours(b, u));
    }
    if (fam == "deterministic") {
        expect_keys(v, path, {"family", "value", "unit"});
        double x = positive_at(require(v, path, "value"), path + ".value");
        return deterministic(to_hours(x, unit_of(v, path)));
    }
    fail(path + ".family",
         "unknown family '" + fam + "' (exponential, hypoexponential, deterministic)");
}

inline Topology topology_at(const Json& root) {
    const Json& t = require(root, "config", "topology");
    expect_object(t, "topology");
    expect_keys(t, "topology", {"num_sfs", "num_hosts", "vm_host_assignment"});
    long long m = integer_at(require(t, "topology", "num_sfs"), "topology.num_sfs");
    long long n = integer_at(require(t, "topology", "num_hosts"), "topology.num_hosts");
    if (m < 1 || m > 64) fail("topology.num_sfs", "must be in 1..64");
    if (n < 1 || n > 64) fail("topology.num_hosts", "must be in 1..64");
    auto it = t.find("vm_host_assignment");
    if (it == t.end()) return Topology::even(static_cast<int>(m), static_cast<int>(n));
    if (!it->is_array()) fail("topology.vm_host_assignment", "expected an array of host ids");
    std::vector<int> host_of;
    for (std::size_t i = 0; i < it->size(); ++i)
        host_of.push_back(static_cast<int>(integer_at(
            (*it)[i], "topology.vm_host_assignment." + std::to_string(i + 1))));
    return Topology(static_cast<int>(m), static_cast<int>(n), std::move(host_of));
}

template <class T, class Fn>
std::vector<T> members_at(const Json& sec, const std::string& path, int want, Fn parse_one) {
    if (!sec.is_array()) fail(path, "expected an array");
    if (static_cast<int>(sec.size()) != want)
        fail(path, "expected " + std::to_string(want) + " entries, got " +
                       std::to_string(sec.size()));
    std::vector<T> out;
    out.reserve(sec.size());
    for (int i = 0; i < want; ++i) out.push_back(parse_one(sec[i], path + "." + std::to_string(i + 1)));
    return out;
}

inline ParameterSet parameters_at(const Json& root, const Topology& topo) {
    auto pit = root.find("parameters");
    if (pit == root.end()) return ParameterSet::defaults(topo);
    const Json& ps = *pit;
    expect_object(ps, "parameters");
    expect_keys(ps, "parameters", {"sf", "vm", "vmm", "host", "system"});

    auto dist = [](const Json& v, const std::string& base, const char* key) {
        return distribution_at(require(v, base, key), base + "." + key);
    };
    ParameterSet p;
    p.sf = members_at<SfParams>(require(ps, "parameters", "sf"), "parameters.sf", topo.num_sfs(),
                                [&](const Json& v, const std::string& base) {
                                    expect_object(v, base);
                                    expect_keys(v, base, {"aging", "failure", "failover"});
                                    return SfParams{dist(v, base, "aging"), dist(v, base, "failure"),
                                                    dist(v, base, "failover")};
                                });
    p.vm = members_at<VmParams>(require(ps, "parameters", "vm"), "parameters.vm", topo.num_sfs(),
                                [&](const Json& v, const std::string& base) {
                                    expect_object(v, base);
                                    expect_keys(v, base, {"aging", "failure", "failover", "restart"});
                                    return VmParams{dist(v, base, "aging"), dist(v, base, "failure"),
                                                    dist(v, base, "failover"),
                                                    dist(v, base, "restart")};
                                });
    p.vmm = members_at<VmmParams>(require(ps, "parameters", "vmm"), "parameters.vmm",
                                  topo.num_hosts(), [&](const Json& v, const std::string& base) {
                                      expect_object(v, base);
                                      expect_keys(v, base, {"aging", "failure", "migration"});
                                      return VmmParams{dist(v, base, "aging"),
                                                       dist(v, base, "failure"),
                                                       dist(v, base, "migration")};
                                  });
    p.host = members_at<HostParams>(
        require(ps, "parameters", "host"), "parameters.host", topo.num_hosts(),
        [&](const Json& v, const std::string& base) {
            expect_object(v, base);
            expect_keys(v, base, {"restart_sfs", "restart_sfs_vms", "reboot"});
            return HostParams{dist(v, base, "restart_sfs"), dist(v, base, "restart_sfs_vms"),
                              dist(v, base, "reboot")};
        });
    const Json& sys = require(ps, "parameters", "system");
    expect_object(sys, "parameters.system");
    expect_keys(sys, "parameters.system",
                {"restart_all_sfs", "restart_all_sfs_vms", "reboot_all", "repair"});
    p.system = SystemParams{dist(sys, "parameters.system", "restart_all_sfs"),
                            dist(sys, "parameters.system", "restart_all_sfs_vms"),
                            dist(sys, "parameters.system", "reboot_all"),
                            dist(sys, "parameters.system", "repair")};
    p.validate(topo);
    return p;
}

inline SolverOptions solver_at(const Json& root) {
    SolverOptions s{};
    auto it = root.find("solver");
    if (it == root.end()) return s;
    expect_object(*it, "solver");
    expect_keys(*it, "solver", {"quad_rel_tol", "truncation_quantile", "escalation"});
    if (it->contains("quad_rel_tol")) {
        double tol = positive_at((*it)["quad_rel_tol"], "solver.quad_rel_tol");
        if (tol >= 1.0) fail("solver.quad_rel_tol", "must be below 1");
        s.kernel.quad.rel_tol = tol;
    }
    if (it->contains("truncation_quantile")) {
        double q = positive_at((*it)["truncation_quantile"], "solver.truncation_quantile");
        if (q >= 1.0) fail("solver.truncation_quantile", "must be below 1");
        s.kernel.truncation_quantile = q;
    }
    if (it->contains("escalation")) {
        const Json& e = (*it)["escalation"];
        if (!e.is_boolean()) fail("solver.escalation", "expected true or false");
        s.escalation = e.get<bool>();
    }
    return s;
}

inline SimulationConfig simulation_at(const Json& root) {
    SimulationConfig sim{};
    auto it = root.find("simulation");
    if (it == root.end()) return sim;
    expect_object(*it, "simulation");
    expect_keys(*it, "simulation", {"cycles", "replications", "seed"});
    if (it->contains("cycles")) {
        sim.cycles = integer_at((*it)["cycles"], "simulation.cycles");
        if (sim.cycles < 100) fail("simulation.cycles", "need at least 100");
    }
    if (it->contains("replications")) {
        sim.replications = integer_at((*it)["replications"], "simulation.replications");
        if (sim.replications < 100) fail("simulation.replications", "need at least 100");
    }
    if (it->contains("seed")) {
        const Json& s = (*it)["seed"];
        // Storage may be signed or unsigned depending on how the
        // document was built; only the value matters.
        if (!s.is_number_integer() || (!s.is_number_unsigned() && s.get<long long>() < 0))
            fail("simulation.seed", "expected a non-negative integer");
        sim.seed = s.get<std::uint64_t>();
    }
    return sim;
}

} // namespace cfgdetail

inline RunConfig load_config(const cfgdetail::Json& root) {
    cfgdetail::expect_object(root, "config");
    cfgdetail::expect_keys(root, "config", {"topology", "parameters", "solver", "simulation"});
    Topology topo = cfgdetail::topology_at(root);
    return RunConfig{topo, cfgdetail::parameters_at(root, topo), cfgdetail::solver_at(root),
                     cfgdetail::simulation_at(root)};
}

inline RunConfig parse_config(const std::string& text) {
    cfgdetail::Json root;
    try {
        root = cfgdetail::Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config", std::string("not valid JSON: ") + e.what());
    }
    return load_config(root);
}

inline RunConfig read_config_file(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError(file, "cannot open config file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

// Canonical dump: rate-form clocks (per hour) so that values survive a
// dump/load cycle bit for bit; no derived quantities.
inline cfgdetail::Json to_json(const Distribution& d) {
    cfgdetail::Json o;
    if (const auto* e = std::get_if<Exponential>(&d)) {
        o["family"] = "exponential";
        o["rate"] = e->rate;
    } else if (const auto* h = std::get_if<Hypoexponential>(&d)) {
        o["family"] = "hypoexponential";
        o["phase_rates"] = {h->rate1, h->rate2};
    } else {
        o["family"] = "deterministic";
        o["value"] = std::get<Deterministic>(d).value;
        o["unit"] = "h";
    }
    return o;
}

inline cfgdetail::Json dump_config(const RunConfig& cfg) {
    using cfgdetail::Json;
    Json root;
    const Topology& t = cfg.topology;
    root["topology"]["num_sfs"] = t.num_sfs();
    root["topology"]["num_hosts"] = t.num_hosts();
    std::vector<int> assign;
    for (int i = 1; i <= t.num_sfs(); ++i) assign.push_back(t.host_of(i));
    root["topology"]["vm_host_assignment"] = assign;

    Json params;
    for (const auto& s : cfg.params.sf)
        params["sf"].push_back({{"aging", to_json(s.aging)},
                                {"failure", to_json(s.failure)},
                                {"failover", to_json(s.failover)}});
    for (const auto& v : cfg.params.vm)
        params["vm"].push_back({{"aging", to_json(v.aging)},
                                {"failure", to_json(v.failure)},
                                {"failover", to_json(v.failover)},
                                {"restart", to_json(v.restart)}});
    for (const auto& w : cfg.params.vmm)
        params["vmm"].push_back({{"aging", to_json(w.aging)},
                                 {"failure", to_json(w.failure)},
                                 {"migration", to_json(w.migration)}});
    for (const auto& h : cfg.params.host)
        params["host"].push_back({{"restart_sfs", to_json(h.restart_sfs)},
                                  {"restart_sfs_vms", to_json(h.restart_sfs_vms)},
                                  {"reboot", to_json(h.reboot)}});
    params["system"] = {{"restart_all_sfs", to_json(cfg.params.system.restart_all_sfs)},
                        {"restart_all_sfs_vms", to_json(cfg.params.system.restart_all_sfs_vms)},
                        {"reboot_all", to_json(cfg.params.system.reboot_all)},
                        {"repair", to_json(cfg.params.system.repair)}};
    root["parameters"] = std::move(params);

    root["solver"]["quad_rel_tol"] = cfg.solver.kernel.quad.rel_tol;
    root["solver"]["truncation_quantile"] = cfg.solver.kernel.truncation_quantile;
    root["solver"]["escalation"] = cfg.solver.escalation;

    root["simulation"]["cycles"] = cfg.simulation.cycles;
    root["simulation"]["replications"] = cfg.simulation.replications;
    if (cfg.simulation.seed) root["simulation"]["seed"] = *cfg.simulation.seed;
    return root;
}

// Starter document with every knob spelled out, mean-form times in
// their natural units. Loading it reproduces the built-in defaults
// bit for bit because both go through the same unit conversion.
inline cfgdetail::Json default_config_json(int num_sfs, int num_hosts) {
    using cfgdetail::Json;
    using namespace smpdep::defaults;
    Topology topo = Topology::even(num_sfs, num_hosts);

    auto exp_mean = [](Duration d) {
        return Json{{"family", "exponential"}, {"mean", d.value}, {"unit", cfgdetail::unit_name(d.unit)}};
    };
    auto hypo_phase = [](Duration ph) {
        return Json{{"family", "hypoexponential"},
                    {"phase_means", {ph.value, ph.value}},
                    {"unit", cfgdetail::unit_name(ph.unit)}};
    };

    Json root;
    root["topology"]["num_sfs"] = num_sfs;
    root["topology"]["num_hosts"] = num_hosts;
    std::vector<int> assign;
    for (int i = 1; i <= num_sfs; ++i) assign.push_back(topo.host_of(i));
    root["topology"]["vm_host_assignment"] = assign;

    Json params;
    for (int i = 0; i < num_sfs; ++i) {
        params["sf"].push_back({{"aging", exp_mean(kSfAgingMean)},
                                {"failure", hypo_phase(kSfFailurePhase)},
                                {"failover", exp_mean(kSfFailoverMean)}});
        params["vm"].push_back({{"aging", exp_mean(kVmAgingMean)},
                                {"failure", hypo_phase(kVmFailurePhase)},
                                {"failover", exp_mean(kVmFailoverMean)},
                                {"restart", exp_mean(kVmRestartMean)}});
    }
    for (int j = 0; j < num_hosts; ++j) {
        params["vmm"].push_back({{"aging", exp_mean(kVmmAgingMean)},
                                 {"failure", hypo_phase(kVmmFailurePhase)},
                                 {"migration", exp_mean(kVmmMigrationMean)}});
        params["host"].push_back({{"restart_sfs", exp_mean(kHostRestartSfsMean)},
                                  {"restart_sfs_vms", exp_mean(kHostRestartSfsVmsMean)},
                                  {"reboot", exp_mean(kHostRebootMean)}});
    }
    params["system"] = {{"restart_all_sfs", exp_mean(kSystemRestartSfsMean)},
                        {"restart_all_sfs_vms", exp_mean(kSystemRestartSfsVmsMean)},
                        {"reboot_all", exp_mean(kSystemRebootMean)},
                        {"repair", exp_mean(kRepairMean)}};
    root["parameters"] = std::move(params);

    root["solver"]["quad_rel_tol"] = QuadratureSettings{}.rel_tol;
    root["solver"]["truncation_quantile"] = KernelEvalSettings{}.truncation_quantile;
    root["solver"]["escalation"] = true;
    root["simulation"]["cycles"] = 10000;
    root["simulation"]["replications"] = 10000;
    root["simulation"]["seed"] = 42;
    return root;
}

} // namespace smpdep
