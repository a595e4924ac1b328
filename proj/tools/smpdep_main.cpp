#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "smpdep/config.hpp"
#include "smpdep/ctmc.hpp"
#include "smpdep/report.hpp"
#include "smpdep/sensitivity.hpp"
#include "smpdep/simulator.hpp"
#include "smpdep/solver.hpp"
#include "smpdep/svg.hpp"

namespace {

using namespace smpdep;

void write_output(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::fwrite(text.data(), 1, text.size(), stdout);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError(path, "cannot open for writing");
    out << text;
}

struct CommonOpts {
    std::string config_path;
    std::string format = "text";
    std::string out;
};

void add_common(CLI::App* cmd, CommonOpts& o, std::initializer_list<const char*> formats) {
    cmd->add_option("config", o.config_path, "model configuration file (JSON)")->required();
    std::string fmts;
    for (const char* f : formats) fmts += std::string(fmts.empty() ? "" : "|") + f;
    cmd->add_option("--format", o.format, "output format (" + fmts + ")")
        ->check(CLI::IsMember(std::vector<std::string>(formats.begin(), formats.end())));
    cmd->add_option("-o,--out", o.out, "write output to a file instead of stdout");
}

int run_availability(const CommonOpts& o) {
    RunConfig cfg = read_config_file(o.config_path);
    SmpSolution sol = solve_steady_state(cfg.topology, cfg.params, cfg.solver);
    StateSpace space(cfg.topology);
    std::string text;
    if (o.format == "csv")
        text = csv_availability(space, sol);
    else if (o.format == "json")
        text = json_availability(space, sol).dump(2) + "\n";
    else
        text = text_availability(space, sol);
    write_output(o.out, text);
    return 0;
}

int run_mttf(const CommonOpts& o, const std::string& oracle) {
    RunConfig cfg = read_config_file(o.config_path);
    AbsorbingSolution sol = solve_time_to_failure(cfg.topology, cfg.params, cfg.solver);
    StateSpace space(cfg.topology);

    std::optional<double> oracle_value;
    if (!oracle.empty()) {
        if (oracle != "ctmc") throw ConfigError("--oracle", "only 'ctmc' is available");
        if (!all_exponential(cfg.params))
            throw ConfigError("oracle requires exponential parameters");
        oracle_value = ctmc_mttf(cfg.topology, cfg.params);
    }

    std::string text;
    if (o.format == "csv") {
        if (oracle_value)
            throw ConfigError("--oracle", "the oracle line does not fit the csv table; "
                                          "use text or json");
        text = csv_mttf(space, sol);
    } else if (o.format == "json") {
        auto j = json_mttf(space, sol);
        if (oracle_value) {
            j["ctmc_mttf_hours"] = *oracle_value;
            j["oracle_rel_diff"] = (sol.mttf - *oracle_value) / *oracle_value;
        }
        text = j.dump(2) + "\n";
    } else {
        text = text_mttf(space, sol);
        if (oracle_value) {
            text += "\nctmc oracle = " + format_sig(*oracle_value) + " hours (rel diff " +
                    format_sig((sol.mttf - *oracle_value) / *oracle_value) + ")\n";
        }
    }
    write_output(o.out, text);
    return 0;
}

struct SensOpts {
    bool all = false;
    std::vector<std::string> params;
    std::string metric = "both";
};

int run_sensitivity(const CommonOpts& o, const SensOpts& so) {
    RunConfig cfg = read_config_file(o.config_path);
    if (so.all == !so.params.empty())
        throw ConfigError("sensitivity", "choose either --all or at least one --param");

    SensitivityOptions opt;
    opt.solver = cfg.solver;

    std::vector<SensitivityEntry> entries;
    if (so.all) {
        entries = full_report(cfg.topology, cfg.params, opt);
    } else {
        std::vector<Metric> metrics;
        if (so.metric == "availability" || so.metric == "both")
            metrics.push_back(Metric::Availability);
        if (so.metric == "mttf" || so.metric == "both") metrics.push_back(Metric::Mttf);
        for (const auto& path : so.params) {
            for (Metric m : metrics) {
                try {
                    entries.push_back(scaled_sensitivity(cfg.topology, cfg.params, path, m, opt));
                } catch (const ConfigError& e) {
                    std::string msg = std::string(e.what()) + "\nvalid parameter paths:\n";
                    ParameterSet copy = cfg.params;
                    for (const auto& r : list_params(copy)) msg += "  " + r.path + "\n";
                    throw ConfigError(msg);
                }
            }
        }
        std::stable_sort(entries.begin(), entries.end(),
                         [](const SensitivityEntry& a, const SensitivityEntry& b) {
                             return std::fabs(a.scaled) > std::fabs(b.scaled);
                         });
    }

    std::string text;
    if (o.format == "csv")
        text = csv_sensitivity(entries);
    else if (o.format == "json")
        text = json_sensitivity(entries).dump(2) + "\n";
    else
        text = text_sensitivity(entries);
    write_output(o.out, text);
    return 0;
}

struct SimOpts {
    std::optional<std::uint64_t> seed;
    std::optional<long long> cycles, replications;
    std::string trace;
};

// The walk of the first regeneration cycle, exactly as
// simulate_availability will play it for the same seed.
std::string trace_first_cycle(const KernelModel& full, std::uint64_t seed) {
    SimModel sm = lower_model(full);
    std::string out = "state,entry_time,sojourn\n";
    RngStream g = make_stream(seed, 0);
    double t = 0.0;
    int s = sm.start;
    do {
        SimStep st = sim_step(sm, s, g);
        out += full.space.label(s) + "," + format_sig(t) + "," + format_sig(st.dwell) + "\n";
        t += st.dwell;
        if (st.target < 0) throw StructuralError("full kernel row is missing an edge");
        s = st.target;
    } while (s != sm.start);
    return out;
}

int run_simulate(const CommonOpts& o, const SimOpts& so) {
    RunConfig cfg = read_config_file(o.config_path);
    long long cycles = so.cycles.value_or(cfg.simulation.cycles);
    long long reps = so.replications.value_or(cfg.simulation.replications);
    std::uint64_t seed;
    if (so.seed)
        seed = *so.seed;
    else if (cfg.simulation.seed)
        seed = *cfg.simulation.seed;
    else {
        std::random_device rd;
        seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    }

    Evaluation ev = evaluate(cfg.topology, cfg.params, cfg.solver);
    KernelModel full = build_full_kernel(cfg.topology, cfg.params);
    KernelModel absorbing = build_absorbing_kernel(cfg.topology, cfg.params);
    SimEstimate av = simulate_availability(full, cycles, seed);
    SimEstimate mt = simulate_mttf(absorbing, reps, seed);

    std::string text;
    if (o.format == "json") {
        nlohmann::ordered_json j;
        j["seed"] = seed;
        j["availability"] = {{"estimate", av.point},
                             {"half_width", av.half_width},
                             {"cycles", av.count},
                             {"analytic", ev.smp.availability},
                             {"covered", std::fabs(av.point - ev.smp.availability) <=
                                             av.half_width}};
        j["mttf"] = {{"estimate", mt.point},
                     {"half_width", mt.half_width},
                     {"replications", mt.count},
                     {"analytic", ev.absorbing.mttf},
                     {"covered", std::fabs(mt.point - ev.absorbing.mttf) <= mt.half_width}};
        text = j.dump(2) + "\n";
    } else {
        text = "seed = " + std::to_string(seed) + "\n";
        text += text_simulation_line("availability", av, ev.smp.availability);
        text += text_simulation_line("mttf", mt, ev.absorbing.mttf);
    }
    write_output(o.out, text);
    if (!so.trace.empty()) write_output(so.trace, trace_first_cycle(full, seed));
    return 0;
}

struct SweepOpts {
    std::string param, values;
    std::string sweep_m, sweep_n;
    std::vector<std::string> swaps;
    std::string plot;
};

std::vector<double> parse_values(const std::string& csv, const std::string& where) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t used = 0;
            double v = std::stod(tok, &used);
            if (used != tok.size()) throw std::invalid_argument(tok);
            out.push_back(v);
        } catch (const std::exception&) {
            throw ConfigError(where, "'" + tok + "' is not a number");
        }
        if (!(out.back() > 0.0) || !std::isfinite(out.back()))
            throw ConfigError(where, "sweep values must be positive and finite");
    }
    if (out.empty()) throw ConfigError(where, "needs at least one value");
    return out;
}

ParameterSet apply_swaps(ParameterSet p, const std::vector<std::string>& swaps) {
    for (const auto& s : swaps) {
        auto eq = s.find('=');
        std::string group = s.substr(0, eq == std::string::npos ? s.size() : eq);
        std::string fam = eq == std::string::npos ? "" : s.substr(eq + 1);
        ParamGroup g;
        if (group == "failure")
            g = ParamGroup::Failure;
        else if (group == "recovery")
            g = ParamGroup::Recovery;
        else
            throw ConfigError("--swap-family",
                              "expected failure=FAMILY or recovery=FAMILY, got '" + s + "'");
        Family f;
        if (fam == "exponential")
            f = Family::Exponential;
        else if (fam == "hypoexponential")
            f = Family::Hypoexponential;
        else if (fam == "deterministic")
            f = Family::Deterministic;
        else
            throw ConfigError("--swap-family", "unknown family '" + fam +
                                                   "' (exponential, hypoexponential, "
                                                   "deterministic)");
        p = with_family(std::move(p), g, f);
    }
    return p;
}

int run_sweep(const CommonOpts& o, const SweepOpts& so) {
    RunConfig cfg = read_config_file(o.config_path);
    int axes = (!so.param.empty()) + (!so.sweep_m.empty()) + (!so.sweep_n.empty());
    if (axes != 1)
        throw ConfigError("sweep", "choose exactly one axis: --param/--values, --sweep-m, "
                                   "or --sweep-n");
    if (!so.param.empty() && so.values.empty())
        throw ConfigError("sweep", "--param needs --values");

    std::vector<double> xs;
    std::string x_label;
    if (!so.param.empty()) {
        xs = parse_values(so.values, "--values");
        x_label = so.param;
    } else if (!so.sweep_m.empty()) {
        xs = parse_values(so.sweep_m, "--sweep-m");
        x_label = "service functions (m)";
    } else {
        xs = parse_values(so.sweep_n, "--sweep-n");
        x_label = "hosts (n)";
    }

    ParameterSet base = apply_swaps(cfg.params, so.swaps);
    if (!so.param.empty()) {
        // Surface resolution errors before spawning workers.
        ParameterSet probe = base;
        resolve_params(probe, so.param);
    }

    std::vector<SweepRow> rows(xs.size());
    auto eval_point = [&](long long i) {
        double x = xs[static_cast<std::size_t>(i)];
        if (!so.param.empty()) {
            ParameterSet p = base;
            for (auto& ref : resolve_params(p, so.param)) ref.set(x);
            Evaluation ev = evaluate(cfg.topology, p, cfg.solver);
            rows[i] = {x, ev.smp.availability, ev.absorbing.mttf};
        } else {
            int m = cfg.topology.num_sfs(), n = cfg.topology.num_hosts();
            if (!so.sweep_m.empty())
                m = static_cast<int>(x);
            else
                n = static_cast<int>(x);
            if (static_cast<double>(!so.sweep_m.empty() ? m : n) != x)
                throw ConfigError("sweep", "component counts must be integers");
            Topology topo = Topology::even(m, n);
            ParameterSet p = apply_swaps(ParameterSet::defaults(topo), so.swaps);
            Evaluation ev = evaluate(topo, p, cfg.solver);
            rows[i] = {x, ev.smp.availability, ev.absorbing.mttf};
        }
    };
    long long n = static_cast<long long>(xs.size());
    detail::parallel_indexed(n, detail::resolve_threads(0, n), eval_point);

    std::string text;
    if (o.format == "json")
        text = json_sweep(rows).dump(2) + "\n";
    else
        text = csv_sweep(rows);
    write_output(o.out, text);

    if (!so.plot.empty()) {
        ChartSeries avail{"availability", {}, {}};
        ChartSeries mttf{"mttf (hours)", {}, {}};
        for (const auto& r : rows) {
            avail.x.push_back(r.value);
            avail.y.push_back(r.availability);
            mttf.x.push_back(r.value);
            mttf.y.push_back(r.mttf);
        }
        write_output(so.plot, line_chart_svg("sweep of " + x_label, x_label, {avail, mttf}));
    }
    return 0;
}

int run_make_config(int num_sfs, int num_hosts, const std::string& out) {
    write_output(out, default_config_json(num_sfs, num_hosts).dump(2) + "\n");
    return 0;
}

int run_transitions(const CommonOpts& o, bool absorbing) {
    RunConfig cfg = read_config_file(o.config_path);
    KernelModel km = absorbing ? build_absorbing_kernel(cfg.topology, cfg.params)
                               : build_full_kernel(cfg.topology, cfg.params);
    std::ostringstream ss;
    dump_transitions(km, ss);
    write_output(o.out, ss.str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"steady-state availability and MTTF of a multi-host VM service chain\n"
                 "under software aging, via a semi-Markov model and simulation"};
    app.require_subcommand(1);

    CommonOpts avail_o;
    CLI::App* avail = app.add_subcommand("availability", "steady-state availability and state "
                                                         "probabilities");
    add_common(avail, avail_o, {"text", "csv", "json"});

    CommonOpts mttf_o;
    std::string mttf_oracle;
    CLI::App* mttf = app.add_subcommand("mttf", "mean time to failure from the all-healthy "
                                                "state");
    add_common(mttf, mttf_o, {"text", "csv", "json"});
    mttf->add_option("--oracle", mttf_oracle,
                     "cross-check against an independent solver (ctmc; needs all-exponential "
                     "parameters)");

    CommonOpts sens_o;
    SensOpts sens_so;
    CLI::App* sens = app.add_subcommand("sensitivity", "scaled parameter sensitivities of "
                                                       "availability and MTTF");
    add_common(sens, sens_o, {"text", "csv", "json"});
    sens->add_flag("--all", sens_so.all, "every scalar parameter, both metrics, sorted by "
                                         "influence");
    sens->add_option("--param", sens_so.params, "parameter path, e.g. sf.1.aging.rate "
                                                "(repeatable)");
    sens->add_option("--metric", sens_so.metric, "availability|mttf|both (default both)")
        ->check(CLI::IsMember({"availability", "mttf", "both"}));

    CommonOpts sim_o;
    SimOpts sim_so;
    std::uint64_t sim_seed_raw = 0;
    long long sim_cycles_raw = 0, sim_reps_raw = 0;
    CLI::App* sim = app.add_subcommand("simulate", "Monte-Carlo estimates with the analytic "
                                                   "values side by side");
    add_common(sim, sim_o, {"text", "json"});
    CLI::Option* oseed = sim->add_option("--seed", sim_seed_raw,
                                         "RNG seed (default: config, else entropy)");
    CLI::Option* ocyc = sim->add_option("--cycles", sim_cycles_raw,
                                        "regeneration cycles for availability");
    CLI::Option* orep = sim->add_option("--replications", sim_reps_raw,
                                        "independent walks for MTTF");
    sim->add_option("--trace", sim_so.trace,
                    "write the first regeneration cycle as CSV to this file");

    CommonOpts sweep_o;
    sweep_o.format = "csv";
    SweepOpts sweep_so;
    CLI::App* sweep = app.add_subcommand("sweep", "evaluate both metrics along a parameter or "
                                                  "size axis");
    add_common(sweep, sweep_o, {"csv", "json"});
    sweep->add_option("--param", sweep_so.param, "parameter path to sweep ('*' member index "
                                                 "sweeps all members)");
    sweep->add_option("--values", sweep_so.values, "comma-separated positive values");
    sweep->add_option("--sweep-m", sweep_so.sweep_m,
                      "component counts; each point uses default timings at that size");
    sweep->add_option("--sweep-n", sweep_so.sweep_n,
                      "host counts; each point uses default timings at that size");
    sweep->add_option("--swap-family", sweep_so.swaps,
                      "failure=FAMILY or recovery=FAMILY, mean-matched (repeatable)");
    sweep->add_option("--plot", sweep_so.plot, "also write a line chart (SVG) to this file");

    int mk_m = 4, mk_n = 2;
    std::string mk_out;
    CLI::App* mk = app.add_subcommand("make-config", "write a starter configuration with "
                                                     "default timings");
    mk->add_option("--num-sfs", mk_m, "service function count (default 4)")
        ->check(CLI::Range(1, 64));
    mk->add_option("--num-hosts", mk_n, "host count (default 2)")->check(CLI::Range(1, 64));
    mk->add_option("-o,--out", mk_out, "write to a file instead of stdout");

    CommonOpts tr_o;
    bool tr_absorbing = false;
    CLI::App* tr = app.add_subcommand("transitions", "dump the transition structure for "
                                                     "inspection");
    add_common(tr, tr_o, {"text"});
    tr->add_flag("--absorbing", tr_absorbing, "dump the absorbing variant instead of the full "
                                              "one");

    int rc = 0;
    avail->callback([&] { rc = run_availability(avail_o); });
    mttf->callback([&] { rc = run_mttf(mttf_o, mttf_oracle); });
    sens->callback([&] { rc = run_sensitivity(sens_o, sens_so); });
    sim->callback([&] {
        if (*oseed) sim_so.seed = sim_seed_raw;
        if (*ocyc) sim_so.cycles = sim_cycles_raw;
        if (*orep) sim_so.replications = sim_reps_raw;
        rc = run_simulate(sim_o, sim_so);
    });
    sweep->callback([&] { rc = run_sweep(sweep_o, sweep_so); });
    mk->callback([&] { rc = run_make_config(mk_m, mk_n, mk_out); });
    tr->callback([&] { rc = run_transitions(tr_o, tr_absorbing); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const StructuralError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return rc;
}
