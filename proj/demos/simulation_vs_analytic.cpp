// Monte-Carlo cross-check of the analytic pipeline on a single SF.
// Down time is rare at realistic rates, so the availability run uses
// enough regeneration cycles to observe a few dozen outages.

#include <cstdio>

#include "smpdep/report.hpp"
#include "smpdep/simulator.hpp"
#include "smpdep/solver.hpp"

using namespace smpdep;

int main() {
    Topology topo = Topology::even(1, 1);
    ParameterSet params = ParameterSet::defaults(topo);
    Evaluation ev = evaluate(topo, params);

    KernelModel full = build_full_kernel(topo, params);
    KernelModel absorbing = build_absorbing_kernel(topo, params);
    const std::uint64_t seed = 2026;

    SimEstimate av = simulate_availability(full, 400000, seed);
    SimEstimate mt = simulate_mttf(absorbing, 4000, seed);

    std::printf("seed = %llu\n", static_cast<unsigned long long>(seed));
    std::fputs(text_simulation_line("availability", av, ev.smp.availability).c_str(), stdout);
    std::fputs(text_simulation_line("mttf", mt, ev.absorbing.mttf).c_str(), stdout);
    return 0;
}
