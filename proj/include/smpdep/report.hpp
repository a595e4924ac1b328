#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "smpdep/sensitivity.hpp"
#include "smpdep/simulator.hpp"
#include "smpdep/solver.hpp"

namespace smpdep {

// 15 significant digits everywhere a metric value is printed: the CSV
// outputs feed regression diffs, so formatting precision must exceed
// the solver's accuracy, not the other way round.
inline std::string format_sig(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", x);
    return buf;
}

inline std::string csv_availability(const StateSpace& space, const SmpSolution& sol) {
    std::string out = "state,label,pi,h,up\n";
    for (int i = 0; i < space.size(); ++i) {
        out += std::to_string(i) + "," + space.label(i) + "," + format_sig(sol.pi(i)) + "," +
               format_sig(sol.h(i)) + "," + (space.is_up(i) ? "1" : "0") + "\n";
    }
    return out;
}

inline std::string csv_mttf(const StateSpace& space, const AbsorbingSolution& sol) {
    std::string out = "state,label,visits,h\n";
    for (std::size_t k = 0; k < sol.order.size(); ++k) {
        int s = sol.order[k];
        out += std::to_string(s) + "," + space.label(s) + "," +
               format_sig(sol.visits(static_cast<int>(k))) + "," +
               format_sig(sol.sojourn(static_cast<int>(k))) + "\n";
    }
    return out;
}

inline const char* flag_name(const SensitivityEntry& e) {
    if (e.structural_zero) return "structural_zero";
    if (e.low_confidence) return "low_confidence";
    return "";
}

inline std::string csv_sensitivity(const std::vector<SensitivityEntry>& entries) {
    std::string out = "parameter,metric,scaled_sensitivity,flag\n";
    for (const auto& e : entries)
        out += e.parameter + "," + metric_name(e.metric) + "," + format_sig(e.scaled) + "," +
               flag_name(e) + "\n";
    return out;
}

struct SweepRow {
    double value = 0.0;
    double availability = 0.0;
    double mttf = 0.0;
};

inline std::string csv_sweep(const std::vector<SweepRow>& rows) {
    std::string out = "value,availability,mttf\n";
    for (const auto& r : rows)
        out += format_sig(r.value) + "," + format_sig(r.availability) + "," +
               format_sig(r.mttf) + "\n";
    return out;
}

inline nlohmann::ordered_json json_availability(const StateSpace& space, const SmpSolution& sol) {
    nlohmann::ordered_json root;
    root["availability"] = sol.availability;
    root["unavailability"] = sol.unavailability;
    auto& states = root["states"];
    for (int i = 0; i < space.size(); ++i)
        states.push_back({{"state", i},
                          {"label", space.label(i)},
                          {"pi", sol.pi(i)},
                          {"h", sol.h(i)},
                          {"up", space.is_up(i)}});
    return root;
}

inline nlohmann::ordered_json json_mttf(const StateSpace& space, const AbsorbingSolution& sol) {
    nlohmann::ordered_json root;
    root["mttf_hours"] = sol.mttf;
    root["mttf_days"] = sol.mttf / 24.0;
    auto& states = root["states"];
    for (std::size_t k = 0; k < sol.order.size(); ++k) {
        int s = sol.order[k];
        states.push_back({{"state", s},
                          {"label", space.label(s)},
                          {"visits", sol.visits(static_cast<int>(k))},
                          {"h", sol.sojourn(static_cast<int>(k))}});
    }
    return root;
}

inline nlohmann::ordered_json json_sensitivity(const std::vector<SensitivityEntry>& entries) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& e : entries)
        arr.push_back({{"parameter", e.parameter},
                       {"metric", metric_name(e.metric)},
                       {"scaled_sensitivity", e.scaled},
                       {"derivative", e.derivative},
                       {"step", e.step},
                       {"structural_zero", e.structural_zero},
                       {"low_confidence", e.low_confidence}});
    return arr;
}

inline nlohmann::ordered_json json_sweep(const std::vector<SweepRow>& rows) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : rows)
        arr.push_back(
            {{"value", r.value}, {"availability", r.availability}, {"mttf", r.mttf}});
    return arr;
}

inline std::string text_availability(const StateSpace& space, const SmpSolution& sol) {
    std::string out;
    out += "availability   = " + format_sig(sol.availability) + "\n";
    out += "unavailability = " + format_sig(sol.unavailability) + "\n\n";
    char line[160];
    std::snprintf(line, sizeof line, "%-5s %-24s %-22s %-22s %s\n", "state", "label", "pi",
                  "h_hours", "up");
    out += line;
    for (int i = 0; i < space.size(); ++i) {
        std::snprintf(line, sizeof line, "%-5d %-24s %-22.15g %-22.15g %s\n", i,
                      space.label(i).c_str(), sol.pi(i), sol.h(i),
                      space.is_up(i) ? "up" : "down");
        out += line;
    }
    return out;
}

inline std::string text_mttf(const StateSpace& space, const AbsorbingSolution& sol) {
    std::string out;
    out += "mttf = " + format_sig(sol.mttf) + " hours (" + format_sig(sol.mttf / 24.0) +
           " days)\n\n";
    char line[160];
    std::snprintf(line, sizeof line, "%-5s %-24s %-22s %s\n", "state", "label", "visits",
                  "h_hours");
    out += line;
    for (std::size_t k = 0; k < sol.order.size(); ++k) {
        int s = sol.order[k];
        std::snprintf(line, sizeof line, "%-5d %-24s %-22.15g %-22.15g\n", s,
                      space.label(s).c_str(), sol.visits(static_cast<int>(k)),
                      sol.sojourn(static_cast<int>(k)));
        out += line;
    }
    return out;
}

inline std::string text_sensitivity(const std::vector<SensitivityEntry>& entries) {
    std::string out;
    char line[200];
    std::snprintf(line, sizeof line, "%-28s %-13s %-22s %s\n", "parameter", "metric",
                  "scaled_sensitivity", "flag");
    out += line;
    for (const auto& e : entries) {
        std::snprintf(line, sizeof line, "%-28s %-13s %-22.15g %s\n", e.parameter.c_str(),
                      metric_name(e.metric), e.scaled, flag_name(e));
        out += line;
    }
    return out;
}

// One verdict line per metric: estimate, interval, analytic value and
// whether the interval covers it.
inline std::string text_simulation_line(const char* metric, const SimEstimate& est,
                                        double analytic) {
    bool covered = std::fabs(est.point - analytic) <= est.half_width;
    char line[256];
    std::snprintf(line, sizeof line,
                  "%-13s estimate %.15g  ci95 [%.15g, %.15g]  analytic %.15g  %s\n", metric,
                  est.point, est.point - est.half_width, est.point + est.half_width, analytic,
                  covered ? "covered" : "NOT covered");
    return line;
}

} // namespace smpdep
