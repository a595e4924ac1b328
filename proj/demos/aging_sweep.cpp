// Sweep the SF aging rate around its default and chart the response
// of both metrics. Writes aging_sweep.svg next to the binary.

#include <cstdio>
#include <fstream>

#include "smpdep/report.hpp"
#include "smpdep/solver.hpp"
#include "smpdep/svg.hpp"

using namespace smpdep;

int main() {
    Topology topo = Topology::even(4, 2);
    ParameterSet base = ParameterSet::defaults(topo);

    std::vector<SweepRow> rows;
    for (double factor : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) {
        ParameterSet p = base;
        for (auto& ref : list_params(p))
            if (ref.path.find(".aging.") != std::string::npos) ref.set(ref.get() * factor);
        Evaluation ev = evaluate(topo, p);
        rows.push_back({factor, ev.smp.availability, ev.absorbing.mttf});
    }
    std::fputs(csv_sweep(rows).c_str(), stdout);

    ChartSeries avail{"availability", {}, {}};
    ChartSeries mttf{"mttf (hours)", {}, {}};
    for (const auto& r : rows) {
        avail.x.push_back(r.value);
        avail.y.push_back(r.availability);
        mttf.x.push_back(r.value);
        mttf.y.push_back(r.mttf);
    }
    std::ofstream svg("aging_sweep.svg", std::ios::binary);
    svg << line_chart_svg("response to aging speed", "aging rate multiplier", {avail, mttf});
    std::puts("chart written to aging_sweep.svg");
    return 0;
}
