#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "smpdep/config.hpp"
#include "smpdep/report.hpp"
#include "smpdep/svg.hpp"

using namespace smpdep;
using Json = nlohmann::ordered_json;

namespace {

// Bit-level equality of every scalar parameter in stable order.
void check_same_params(ParameterSet a, ParameterSet b) {
    auto ra = list_params(a), rb = list_params(b);
    REQUIRE(ra.size() == rb.size());
    for (std::size_t i = 0; i < ra.size(); ++i) {
        INFO(ra[i].path);
        CHECK(ra[i].path == rb[i].path);
        CHECK(ra[i].get() == rb[i].get());
    }
}

void check_rejects(Json doc, const std::string& path_fragment) {
    try {
        load_config(doc);
        FAIL("expected rejection mentioning " << path_fragment);
    } catch (const ConfigError& e) {
        INFO(e.what());
        CHECK(std::string(e.what()).find(path_fragment) != std::string::npos);
    }
}

} // namespace

TEST_CASE("generated starter document loads to the built-in defaults") {
    Json doc = default_config_json(2, 2);
    RunConfig cfg = load_config(doc);

    CHECK(cfg.topology.num_sfs() == 2);
    CHECK(cfg.topology.num_hosts() == 2);
    CHECK(cfg.topology.host_of(1) == 1);
    CHECK(cfg.topology.host_of(2) == 2);

    check_same_params(cfg.params, ParameterSet::defaults(cfg.topology));

    CHECK(cfg.solver.escalation);
    CHECK(cfg.solver.kernel.quad.rel_tol == QuadratureSettings{}.rel_tol);
    CHECK(cfg.solver.kernel.truncation_quantile == KernelEvalSettings{}.truncation_quantile);
    CHECK(cfg.simulation.cycles == 10000);
    CHECK(cfg.simulation.replications == 10000);
    REQUIRE(cfg.simulation.seed.has_value());
    CHECK(*cfg.simulation.seed == 42);
}

TEST_CASE("dump and reload is the identity") {
    RunConfig cfg = load_config(default_config_json(3, 2));
    // Exercise every family through the dump path.
    cfg.params.vm[1].restart = deterministic(0.013);
    cfg.params.system.repair = hypoexponential(1.0 / 3.0, 2.0 / 7.0);
    cfg.simulation.seed = 123456789012345ull;
    cfg.simulation.cycles = 2500;

    Json dumped = dump_config(cfg);
    RunConfig back = parse_config(dumped.dump(2));
    check_same_params(cfg.params, back.params);
    CHECK(back.topology.num_sfs() == 3);
    CHECK(back.simulation.cycles == 2500);
    REQUIRE(back.simulation.seed.has_value());
    CHECK(*back.simulation.seed == 123456789012345ull);
    // The canonical form is a fixed point.
    CHECK(dump_config(back) == dumped);
}

TEST_CASE("mean, rate and unit forms produce identical clocks") {
    auto dist = [](const char* text) {
        return cfgdetail::distribution_at(Json::parse(text), "p");
    };
    // Must take the same conversion path as the built-in defaults so
    // the two agree bit for bit.
    Distribution a = dist(R"({"family":"exponential","mean":9.5,"unit":"s"})");
    Topology t11 = Topology::even(1, 1);
    CHECK(std::get<Exponential>(a).rate ==
          std::get<Exponential>(ParameterSet::defaults(t11).sf[0].failover).rate);

    Distribution b = dist(R"({"family":"exponential","mean":48})");
    Distribution c = dist(R"({"family":"exponential","mean":2,"unit":"d"})");
    Distribution d = dist(R"({"family":"exponential","rate":0.020833333333333332})");
    CHECK(std::get<Exponential>(b).rate == std::get<Exponential>(c).rate);
    CHECK(std::get<Exponential>(b).rate == std::get<Exponential>(d).rate);

    Distribution h = dist(R"({"family":"hypoexponential","phase_means":[3.5,3.5],"unit":"d"})");
    CHECK(std::get<Hypoexponential>(h).rate1 == 1.0 / 84.0);
    CHECK(std::get<Hypoexponential>(h).rate2 == 1.0 / 84.0);
    Distribution hr = dist(R"({"family":"hypoexponential","phase_rates":[0.1,0.25]})");
    CHECK(std::get<Hypoexponential>(hr).rate1 == 0.1);
    CHECK(std::get<Hypoexponential>(hr).rate2 == 0.25);

    Distribution det = dist(R"({"family":"deterministic","value":12,"unit":"s"})");
    CHECK(std::get<Deterministic>(det).value == 12.0 / 3600.0);

    Distribution m = dist(R"({"family":"exponential","mean":1.5,"unit":"min"})");
    CHECK(std::get<Exponential>(m).rate == 40.0);
}

TEST_CASE("malformed documents name the failing path") {
    SECTION("missing clock entry") {
        Json doc = default_config_json(2, 1);
        doc["parameters"]["sf"][1].erase("failure");
        check_rejects(doc, "parameters.sf.2.failure");
    }
    SECTION("unknown keys are rejected at every level") {
        Json doc = default_config_json(1, 1);
        doc["observability"] = true;
        check_rejects(doc, "config");

        doc = default_config_json(1, 1);
        doc["parameters"]["sf"][0]["color"] = "red";
        check_rejects(doc, "parameters.sf.1");

        doc = default_config_json(1, 1);
        doc["solver"]["retries"] = 3;
        check_rejects(doc, "solver");
    }
    SECTION("member counts must match the topology") {
        Json doc = default_config_json(2, 2);
        doc["parameters"]["vm"].erase(1);
        check_rejects(doc, "parameters.vm");
    }
    SECTION("distribution forms") {
        Json doc = default_config_json(1, 1);
        doc["parameters"]["sf"][0]["failover"] = {{"family", "weibull"}, {"mean", 1}};
        check_rejects(doc, "parameters.sf.1.failover.family");

        doc = default_config_json(1, 1);
        doc["parameters"]["sf"][0]["failover"] =
            {{"family", "exponential"}, {"mean", 1}, {"rate", 1}};
        check_rejects(doc, "parameters.sf.1.failover");

        doc = default_config_json(1, 1);
        doc["parameters"]["sf"][0]["failover"] =
            {{"family", "exponential"}, {"rate", 1}, {"unit", "s"}};
        check_rejects(doc, "parameters.sf.1.failover.unit");

        doc = default_config_json(1, 1);
        doc["parameters"]["sf"][0]["failover"] =
            {{"family", "exponential"}, {"mean", -2}, {"unit", "s"}};
        check_rejects(doc, "parameters.sf.1.failover.mean");

        doc = default_config_json(1, 1);
        doc["parameters"]["sf"][0]["failover"] =
            {{"family", "exponential"}, {"mean", 1}, {"unit", "weeks"}};
        check_rejects(doc, "parameters.sf.1.failover.unit");

        doc = default_config_json(1, 1);
        doc["parameters"]["vm"][0]["failure"] =
            {{"family", "hypoexponential"}, {"phase_means", {1, 2, 3}}};
        check_rejects(doc, "parameters.vm.1.failure.phase_means");

        doc = default_config_json(1, 1);
        doc["parameters"]["vmm"][0]["aging"] =
            {{"family", "hypoexponential"}, {"phase_rates", {1, 2}}};
        check_rejects(doc, "parameters.vmm.1.aging");
    }
    SECTION("topology bounds") {
        Json doc = default_config_json(1, 1);
        doc["topology"]["num_sfs"] = 0;
        doc["topology"].erase("vm_host_assignment");
        doc.erase("parameters");
        check_rejects(doc, "topology.num_sfs");

        doc = default_config_json(2, 2);
        doc["topology"]["vm_host_assignment"] = {1, 3};
        check_rejects(doc, "topology.vm_host_assignment");

        doc = default_config_json(2, 2);
        doc["topology"]["vm_host_assignment"] = {1, 1};
        check_rejects(doc, "topology.vm_host_assignment");
    }
    SECTION("solver and simulation ranges") {
        Json doc = default_config_json(1, 1);
        doc["solver"]["quad_rel_tol"] = 0.0;
        check_rejects(doc, "solver.quad_rel_tol");

        doc = default_config_json(1, 1);
        doc["solver"]["escalation"] = "yes";
        check_rejects(doc, "solver.escalation");

        doc = default_config_json(1, 1);
        doc["simulation"]["cycles"] = 50;
        check_rejects(doc, "simulation.cycles");

        doc = default_config_json(1, 1);
        doc["simulation"]["cycles"] = 10.5;
        check_rejects(doc, "simulation.cycles");

        doc = default_config_json(1, 1);
        doc["simulation"]["seed"] = -1;
        check_rejects(doc, "simulation.seed");
    }
    SECTION("broken json and wrong top level") {
        CHECK_THROWS_AS(parse_config("{"), ConfigError);
        CHECK_THROWS_AS(parse_config("[]"), ConfigError);
        try {
            parse_config("{not json");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("not valid JSON") != std::string::npos);
        }
    }
    SECTION("omitted sections fall back to defaults") {
        RunConfig cfg = parse_config(R"({"topology":{"num_sfs":2,"num_hosts":1}})");
        check_same_params(cfg.params, ParameterSet::defaults(cfg.topology));
        CHECK(cfg.simulation.cycles == 10000);
        CHECK(!cfg.simulation.seed.has_value());
        CHECK(cfg.topology.host_of(2) == 1);
    }
}

TEST_CASE("report tables carry the pinned headers and full precision") {
    CHECK(format_sig(1.0 / 3.0) == "0.333333333333333");
    CHECK(format_sig(901398.46061941213) == "901398.460619412");

    Topology topo = Topology::even(1, 1);
    ParameterSet p = ParameterSet::defaults(topo);
    Evaluation ev = evaluate(topo, p);
    StateSpace space(topo);

    std::string avail = csv_availability(space, ev.smp);
    REQUIRE(avail.rfind("state,label,pi,h,up\n", 0) == 0);
    int rows = 0;
    double pi_sum = 0.0;
    std::istringstream in(avail);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        ++rows;
        auto c1 = line.find(','), c2 = line.find(',', c1 + 1), c3 = line.find(',', c2 + 1);
        pi_sum += std::stod(line.substr(c2 + 1, c3 - c2 - 1));
    }
    CHECK(rows == space.size());
    CHECK(pi_sum == Catch::Approx(1.0).margin(1e-12));

    std::string mttf = csv_mttf(space, ev.absorbing);
    CHECK(mttf.rfind("state,label,visits,h\n", 0) == 0);
    CHECK(std::count(mttf.begin(), mttf.end(), '\n') ==
          1 + static_cast<long>(ev.absorbing.order.size()));

    auto report = full_report(topo, p);
    std::string sens = csv_sensitivity(report);
    CHECK(sens.rfind("parameter,metric,scaled_sensitivity,flag\n", 0) == 0);
    CHECK(sens.find("structural_zero") != std::string::npos);

    std::string sweep = csv_sweep({{1.0, 0.5, 100.0}, {2.0, 0.75, 200.0}});
    CHECK(sweep == "value,availability,mttf\n1,0.5,100\n2,0.75,200\n");

    std::string text = text_availability(space, ev.smp);
    CHECK(text.find("availability   = 0.9999") != std::string::npos);
}

TEST_CASE("json reports are ordered and complete") {
    Topology topo = Topology::even(1, 1);
    ParameterSet p = ParameterSet::defaults(topo);
    Evaluation ev = evaluate(topo, p);
    StateSpace space(topo);

    auto ja = json_availability(space, ev.smp);
    CHECK(ja.dump().rfind("{\"availability\":", 0) == 0);
    CHECK(ja["states"].size() == static_cast<std::size_t>(space.size()));
    CHECK(ja["states"][0]["label"] == "PERFECT");

    auto jm = json_mttf(space, ev.absorbing);
    CHECK(jm["mttf_hours"].get<double>() == ev.absorbing.mttf);
    CHECK(jm["mttf_days"].get<double>() == ev.absorbing.mttf / 24.0);
    CHECK(jm["states"].size() == ev.absorbing.order.size());

    auto js = json_sensitivity(full_report(topo, p));
    CHECK(js.is_array());
    CHECK(js[0].contains("scaled_sensitivity"));
}

TEST_CASE("line charts are self-contained svg") {
    ChartSeries s1{"availability", {1, 2, 3, 4}, {0.99, 0.992, 0.993, 0.995}};
    ChartSeries s2{"mttf <hours>", {1, 2, 3, 4}, {1e5, 2e5, 2.5e5, 3e5}};
    std::string svg = line_chart_svg("rates & metrics", "failover rate (1/h)", {s1, s2});

    CHECK(svg.rfind("<svg xmlns=", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(std::count(svg.begin(), svg.end(), '\n') > 10);
    auto count_of = [&](const std::string& needle) {
        std::size_t n = 0;
        for (auto pos = svg.find(needle); pos != std::string::npos;
             pos = svg.find(needle, pos + 1))
            ++n;
        return n;
    };
    CHECK(count_of("<polyline") == 2);
    CHECK(svg.find("rates &amp; metrics") != std::string::npos);
    CHECK(svg.find("mttf &lt;hours&gt;") != std::string::npos);
    CHECK(svg.find("http://") != std::string::npos); // only the xmlns, nothing fetched
    CHECK(svg.find("<script") == std::string::npos);

    CHECK_THROWS_AS(line_chart_svg("t", "x", {}), ConfigError);
    CHECK_THROWS_AS(line_chart_svg("t", "x", {ChartSeries{"bad", {1, 2}, {1}}}), ConfigError);

    // Flat and single-point series must not divide by zero.
    std::string flat = line_chart_svg("flat", "x", {ChartSeries{"c", {1, 2}, {5, 5}}});
    CHECK(flat.find("nan") == std::string::npos);
    std::string one = line_chart_svg("one", "x", {ChartSeries{"p", {3}, {7}}});
    CHECK(one.find("nan") == std::string::npos);
}
