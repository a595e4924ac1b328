#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "smpdep/ctmc.hpp"
#include "smpdep/rng.hpp"
#include "smpdep/solver.hpp"

using namespace smpdep;

namespace {

// ---- Independent oracles ------------------------------------------------

// Power iteration: converges to the stationary vector of an
// irreducible aperiodic chain without any linear solve.
Eigen::VectorXd stationary_by_power_iteration(const Eigen::MatrixXd& p, int iters = 20000) {
    Eigen::VectorXd v = Eigen::VectorXd::Constant(p.rows(), 1.0 / static_cast<double>(p.rows()));
    for (int k = 0; k < iters; ++k) {
        v = (v.transpose() * p).transpose();
        v /= v.sum();
    }
    return v;
}

// Literal jump-chain walk with per-state batch-mean standard errors.
struct ChainFreq {
    Eigen::VectorXd mean, se;
};

ChainFreq simulate_jump_chain(const Eigen::MatrixXd& p, long steps, int batches,
                              std::uint64_t seed) {
    const int n = static_cast<int>(p.rows());
    RngStream rng = make_stream(seed, 0);
    long per_batch = steps / batches;
    Eigen::MatrixXd batch_freq = Eigen::MatrixXd::Zero(batches, n);
    int state = 0;
    for (int b = 0; b < batches; ++b) {
        for (long k = 0; k < per_batch; ++k) {
            batch_freq(b, state) += 1.0;
            double u = rng.uniform01(), acc = 0.0;
            int next = n - 1;
            for (int t = 0; t < n; ++t) {
                acc += p(state, t);
                if (u < acc) {
                    next = t;
                    break;
                }
            }
            state = next;
        }
    }
    batch_freq /= static_cast<double>(per_batch);
    ChainFreq out;
    out.mean = batch_freq.colwise().mean();
    out.se = Eigen::VectorXd(n);
    for (int s = 0; s < n; ++s) {
        double var = (batch_freq.col(s).array() - out.mean(s)).square().sum() /
                     static_cast<double>(batches - 1);
        out.se(s) = std::sqrt(var / static_cast<double>(batches));
    }
    return out;
}

ParameterSet exp_only(const Topology& topo) {
    return with_family(ParameterSet::defaults(topo), ParamGroup::Failure, Family::Exponential);
}

void scale_params(ParameterSet& p, const std::string& substring, double factor) {
    for (auto& ref : list_params(p))
        if (ref.path.find(substring) != std::string::npos) ref.set(ref.get() * factor);
}

std::set<std::string> dropped_labels(const Evaluation& ev, const StateSpace& ss) {
    std::set<std::string> out;
    for (int s : ev.smp.dropped) out.insert(ss.label(s));
    return out;
}

} // namespace

// ---- Stationary solve -----------------------------------------------------

TEST_CASE("stationary vector of tiny symmetric chains") {
    Eigen::MatrixXd swap(2, 2);
    swap << 0, 1, 1, 0;
    Eigen::VectorXd v = edtmc_stationary(swap);
    CHECK(v(0) == Catch::Approx(0.5).epsilon(1e-14));
    CHECK(v(1) == Catch::Approx(0.5).epsilon(1e-14));

    Eigen::MatrixXd ring = Eigen::MatrixXd::Zero(3, 3);
    ring(0, 1) = ring(1, 2) = ring(2, 0) = 1.0;
    v = edtmc_stationary(ring);
    for (int s = 0; s < 3; ++s) CHECK(v(s) == Catch::Approx(1.0 / 3).epsilon(1e-14));
}

TEST_CASE("stationary vector matches power iteration on a random chain") {
    RngStream rng = make_stream(11, 0);
    const int n = 12;
    Eigen::MatrixXd p(n, n);
    for (int s = 0; s < n; ++s) {
        double sum = 0.0;
        for (int t = 0; t < n; ++t) {
            p(s, t) = 0.05 + rng.uniform01(); // strictly positive: irreducible, aperiodic
            sum += p(s, t);
        }
        p.row(s) /= sum;
    }
    Eigen::VectorXd direct = edtmc_stationary(p);
    Eigen::VectorXd power = stationary_by_power_iteration(p);
    CHECK((direct - power).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::fabs(direct.sum() - 1.0) < 1e-13);
    CHECK((p.transpose() * direct - direct).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("reducible or non-stochastic input is rejected with state names") {
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(4, 4);
    block(0, 1) = block(1, 0) = 1.0;
    block(2, 3) = block(3, 2) = 1.0;
    CHECK_THROWS_WITH(edtmc_stationary(block),
                      Catch::Matchers::ContainsSubstring("reducible") &&
                          Catch::Matchers::ContainsSubstring("2, 3"));

    Eigen::MatrixXd leaky(2, 2);
    leaky << 0.5, 0.4, 1.0, 0.0;
    CHECK_THROWS_AS(edtmc_stationary(leaky), StructuralError);
}

TEST_CASE("jump-chain frequencies confirm the stationary solve") {
    Topology topo = Topology::even(1, 1);
    KernelModel km = build_full_kernel(topo, ParameterSet::defaults(topo));
    Eigen::MatrixXd tpm = one_step_tpm(km);
    std::vector<int> cls = communicating_class(tpm, 0);
    const int r = static_cast<int>(cls.size());
    Eigen::MatrixXd pr(r, r);
    for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b) pr(a, b) = tpm(cls[a], cls[b]);

    Eigen::VectorXd v = edtmc_stationary(pr);
    ChainFreq sim = simulate_jump_chain(pr, 2'000'000, 1000, 41);
    for (int a = 0; a < r; ++a) {
        INFO("state " << km.space.label(cls[a]) << " v=" << v(a) << " sim=" << sim.mean(a)
                      << " se=" << sim.se(a));
        // One visit in the whole run is 5e-7 of mass; allow that as the
        // discreteness floor beneath the batch-mean band.
        CHECK(std::fabs(sim.mean(a) - v(a)) <= 3.0 * sim.se(a) + 1e-6);
    }
}

// ---- Elementary operations -------------------------------------------------

TEST_CASE("time weighting of visit shares") {
    Eigen::VectorXd v(2), h(2);
    v << 0.5, 0.5;
    h << 1.0, 3.0;
    Eigen::VectorXd pi = steady_state(v, h);
    CHECK(pi(0) == Catch::Approx(0.25).epsilon(1e-15));
    CHECK(pi(1) == Catch::Approx(0.75).epsilon(1e-15));

    Eigen::VectorXd equal = Eigen::VectorXd::Constant(2, 2.5);
    pi = steady_state(v, equal);
    CHECK(pi(0) == Catch::Approx(v(0)).epsilon(1e-15));

    Eigen::VectorXd bad(2);
    bad << 1.0, 0.0;
    CHECK_THROWS_AS(steady_state(v, bad), std::invalid_argument);
    Eigen::VectorXd shrt(1);
    shrt << 1.0;
    CHECK_THROWS_AS(steady_state(v, shrt), std::invalid_argument);
}

TEST_CASE("availability sums the up-state mass") {
    Eigen::VectorXd pi = Eigen::VectorXd::Constant(25, 1.0 / 25.0);
    std::vector<int> up(11);
    for (int k = 0; k < 11; ++k) up[k] = k;
    CHECK(availability(pi, up) == Catch::Approx(0.44).epsilon(1e-14));
    CHECK_THROWS_AS(availability(pi, {25}), std::invalid_argument);
}

TEST_CASE("expected visits on a hand-solvable star") {
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(4, 4);
    for (int i = 1; i <= 3; ++i) {
        p(0, i) = 1.0 / 3.0;
        p(i, 0) = 0.5;
    }
    Eigen::VectorXd v = expected_visits(p, 0);
    CHECK(v(0) == Catch::Approx(2.0).epsilon(1e-13));
    for (int i = 1; i <= 3; ++i) CHECK(v(i) == Catch::Approx(2.0 / 3.0).epsilon(1e-13));

    // No returns: exactly the one initial visit, then gone.
    Eigen::MatrixXd once = Eigen::MatrixXd::Zero(3, 3);
    once(0, 1) = 0.25;
    once(0, 2) = 0.5;
    Eigen::VectorXd v1 = expected_visits(once, 0);
    CHECK(v1(0) == Catch::Approx(1.0).epsilon(1e-14));
    CHECK(v1(1) == Catch::Approx(0.25).epsilon(1e-14));
    CHECK(v1(2) == Catch::Approx(0.5).epsilon(1e-14));

    // Certain return: no absorption anywhere.
    Eigen::MatrixXd loop(2, 2);
    loop << 0, 1, 1, 0;
    CHECK_THROWS_AS(expected_visits(loop, 0), StructuralError);

    Eigen::MatrixXd over(2, 2);
    over << 0.9, 0.9, 0.0, 0.0;
    CHECK_THROWS_AS(expected_visits(over, 0), StructuralError);
}

TEST_CASE("failure time is the visit-weighted sojourn total") {
    Eigen::VectorXd visits(4), h(4);
    visits << 2.0, 2.0 / 3, 2.0 / 3, 2.0 / 3;
    h << 1.0, 1.0, 1.0, 1.0;
    CHECK(mttf_from(visits, h) == Catch::Approx(4.0).epsilon(1e-14));
    Eigen::VectorXd one(1), five(1);
    one << 1.0;
    five << 5.0;
    CHECK(mttf_from(one, five) == Catch::Approx(5.0).epsilon(1e-15));
    CHECK_THROWS_AS(mttf_from(one, h), std::invalid_argument);
}

// ---- Whole-pipeline checks -------------------------------------------------

TEST_CASE("all-exponential pipeline agrees with the Markov-chain oracle") {
    for (auto [m, n] : {std::pair{1, 1}, std::pair{2, 1}, std::pair{2, 2}, std::pair{4, 2}}) {
        Topology topo = Topology::even(m, n);
        ParameterSet p = exp_only(topo);
        Evaluation ev = evaluate(topo, p);
        double a_ctmc = ctmc_availability(topo, p);
        double t_ctmc = ctmc_mttf(topo, p);
        INFO("m=" << m << " n=" << n);
        CHECK(ev.smp.availability == Catch::Approx(a_ctmc).epsilon(1e-10));
        CHECK(ev.smp.unavailability == Catch::Approx(1.0 - a_ctmc).epsilon(1e-9));
        CHECK(ev.absorbing.mttf == Catch::Approx(t_ctmc).epsilon(1e-10));
    }
}

TEST_CASE("visit counts solve identically by both routes") {
    Topology topo = Topology::even(4, 2);
    Evaluation ev = evaluate(topo, ParameterSet::defaults(topo));
    Eigen::VectorXd lin = expected_visits_by(ev.absorbing.tpm, 0, VisitMethod::LinearSystem);
    Eigen::VectorXd closed = expected_visits_by(ev.absorbing.tpm, 0, VisitMethod::ClosedForm);
    for (int i = 0; i < lin.size(); ++i)
        CHECK(std::fabs(lin(i) - closed(i)) / std::fmax(1.0, std::fabs(closed(i))) <= 1e-10);
    CHECK(ev.absorbing.visits(0) >= 1.0);
    CHECK(ev.absorbing.visits.minCoeff() >= 0.0);
}

TEST_CASE("solution invariants hold at defaults") {
    Topology topo = Topology::even(4, 2);
    Evaluation ev = evaluate(topo, ParameterSet::defaults(topo));
    const SmpSolution& s = ev.smp;
    CHECK(std::fabs(s.v.sum() - 1.0) < 1e-12);
    CHECK(std::fabs(s.pi.sum() - 1.0) < 1e-12);
    CHECK(s.pi.minCoeff() >= 0.0);
    CHECK(s.availability > 0.99);
    CHECK(s.availability < 1.0);
    CHECK(s.availability == 1.0 - s.unavailability); // same computation, by construction
    CHECK(s.dropped.empty());
    CHECK(ev.absorbing.mttf > 0.0);
    CHECK(std::isfinite(ev.absorbing.mttf));
    // Day-scale aging with a crash chance of a few parts in ten
    // thousand per incident puts the first failure at 1e5..1e6 hours.
    CHECK(ev.absorbing.mttf > 1e5);
    CHECK(ev.absorbing.mttf < 1e6);
    for (int a = 0; a < ev.absorbing.sojourn.size(); ++a) CHECK(ev.absorbing.sojourn(a) > 0.0);
}

TEST_CASE("slow aging pushes availability to one") {
    Topology topo = Topology::even(4, 2);
    ParameterSet p = ParameterSet::defaults(topo);
    for (auto& ref : list_params(p))
        if (ref.path.find(".aging.rate") != std::string::npos) ref.set(1e-12);
    Evaluation ev = evaluate(topo, p);
    CHECK(ev.smp.availability >= 1.0 - 1e-6);
}

TEST_CASE("restart and repair parameters cannot move the failure time") {
    // Two VMs per host so that every recovery level is reachable and
    // each perturbation visibly moves availability.
    Topology topo = Topology::even(4, 2);
    ParameterSet base = ParameterSet::defaults(topo);
    double mttf0 = evaluate(topo, base).absorbing.mttf;
    const char* pure_recovery[] = {".restart.",       ".restart_sfs.", ".restart_sfs_vms.",
                                   ".reboot.",        "restart_all",   "reboot_all",
                                   "system.repair"};
    for (const char* key : pure_recovery) {
        ParameterSet p = base;
        scale_params(p, key, 3.0);
        Evaluation ev = evaluate(topo, p);
        INFO("perturbed " << key);
        CHECK(ev.absorbing.mttf == mttf0); // bit-identical
        CHECK(ev.smp.availability != evaluate(topo, base).smp.availability);
    }
    // Swapping those clocks to a fixed duration must not move it either.
    ParameterSet det = base;
    double mean_r = mean(det.vm[0].restart);
    for (auto& v : det.vm) v.restart = deterministic(mean(v.restart));
    for (auto& h : det.host) {
        h.restart_sfs = deterministic(mean(h.restart_sfs));
        h.restart_sfs_vms = deterministic(mean(h.restart_sfs_vms));
        h.reboot = deterministic(mean(h.reboot));
    }
    det.system.restart_all_sfs = deterministic(mean(det.system.restart_all_sfs));
    det.system.restart_all_sfs_vms = deterministic(mean(det.system.restart_all_sfs_vms));
    det.system.reboot_all = deterministic(mean(det.system.reboot_all));
    det.system.repair = deterministic(mean(det.system.repair));
    CHECK(evaluate(topo, det).absorbing.mttf == mttf0);
    CHECK(mean(det.vm[0].restart) == Catch::Approx(mean_r));
}

TEST_CASE("availability is monotone in aging and recovery rates") {
    Topology topo = Topology::even(2, 2);
    ParameterSet base = ParameterSet::defaults(topo);
    double a0 = evaluate(topo, base).smp.availability;
    for (auto& ref : list_params(base)) {
        bool aging = ref.path.find(".aging.rate") != std::string::npos;
        bool recovery = ref.path.find("failover") != std::string::npos ||
                        ref.path.find("migration") != std::string::npos ||
                        ref.path.find("restart") != std::string::npos ||
                        ref.path.find("reboot") != std::string::npos ||
                        ref.path.find("repair") != std::string::npos;
        if (!aging && !recovery) continue;
        double old = ref.get();
        ref.set(old * 2.0);
        double a = evaluate(topo, base).smp.availability;
        ref.set(old);
        INFO(ref.path);
        if (aging)
            CHECK(a <= a0 + 1e-14);
        else
            CHECK(a >= a0 - 1e-14);
    }
}

TEST_CASE("faster handover and migration never hurt") {
    Topology topo = Topology::even(4, 2);
    ParameterSet base = ParameterSet::defaults(topo);
    Evaluation ev0 = evaluate(topo, base);
    ParameterSet fast = base;
    scale_params(fast, "failover", 2.0);
    scale_params(fast, "migration", 2.0);
    Evaluation ev1 = evaluate(topo, fast);
    CHECK(ev1.smp.availability >= ev0.smp.availability);
    CHECK(ev1.absorbing.mttf >= ev0.absorbing.mttf);
}

TEST_CASE("more components cannot raise availability or failure time") {
    Evaluation small = evaluate(Topology::even(4, 2),
                                ParameterSet::defaults(Topology::even(4, 2)));
    Evaluation large = evaluate(Topology::even(6, 2),
                                ParameterSet::defaults(Topology::even(6, 2)));
    CHECK(large.smp.availability <= small.smp.availability);
    CHECK(large.absorbing.mttf <= small.absorbing.mttf);
}

TEST_CASE("small topologies drop unreachable recovery levels") {
    {
        Topology topo = Topology::even(1, 1);
        Evaluation ev = evaluate(topo, ParameterSet::defaults(topo));
        StateSpace ss(topo);
        CHECK(dropped_labels(ev, ss) ==
              std::set<std::string>{"SF_SYSTEM_RESTART", "VM_SYSTEM_RESTART", "VMM_SYSTEM_REBOOT",
                                    "HOST1_SF_RESTART", "HOST1_SF_VM_RESTART"});
        for (int s : ev.smp.dropped) {
            CHECK(ev.smp.pi(s) == 0.0);
            CHECK(ev.smp.v(s) == 0.0);
        }
        CHECK(std::fabs(ev.smp.pi.sum() - 1.0) < 1e-12);

        // The unrestricted matrix is genuinely reducible.
        KernelModel km = build_full_kernel(topo, ParameterSet::defaults(topo));
        CHECK_THROWS_AS(edtmc_stationary(one_step_tpm(km)), StructuralError);
    }
    {
        Topology topo = Topology::even(2, 1);
        Evaluation ev = evaluate(topo, ParameterSet::defaults(topo));
        StateSpace ss(topo);
        CHECK(dropped_labels(ev, ss) ==
              std::set<std::string>{"SF_SYSTEM_RESTART", "VM_SYSTEM_RESTART",
                                    "VMM_SYSTEM_REBOOT"});
    }
    {
        // One VM per host: no same-host peers, so the host-level SF and
        // SF+VM restarts can never be entered.
        Topology topo = Topology::even(2, 2);
        Evaluation ev = evaluate(topo, ParameterSet::defaults(topo));
        StateSpace ss(topo);
        CHECK(dropped_labels(ev, ss) ==
              std::set<std::string>{"HOST1_SF_RESTART", "HOST2_SF_RESTART",
                                    "HOST1_SF_VM_RESTART", "HOST2_SF_VM_RESTART"});
    }
    {
        Topology topo = Topology::even(4, 2);
        Evaluation ev = evaluate(topo, ParameterSet::defaults(topo));
        CHECK(ev.smp.dropped.empty());
    }
}

TEST_CASE("instant recovery makes the service always available") {
    Topology topo = Topology::even(2, 2);
    ParameterSet p = ParameterSet::defaults(topo);
    for (const char* key : {"failover", "migration", ".restart.", ".restart_sfs.",
                            ".restart_sfs_vms.", ".reboot.", "restart_all", "reboot_all",
                            "system.repair"})
        scale_params(p, key, 1e8);
    SolverOptions opt;
    opt.escalation = false;
    Evaluation ev = evaluate(topo, p, opt);
    double a_default = evaluate(topo, ParameterSet::defaults(topo)).smp.availability;
    CHECK(ev.smp.availability >= 1.0 - 1e-8);
    CHECK(ev.smp.availability > a_default);
}

TEST_CASE("escalation widens recoveries and lowers availability") {
    Topology topo = Topology::even(4, 2);
    ParameterSet p = ParameterSet::defaults(topo);
    SolverOptions off;
    off.escalation = false;
    double a_on = evaluate(topo, p).smp.availability;
    double a_off = evaluate(topo, p, off).smp.availability;
    CHECK(a_off > a_on);
}
