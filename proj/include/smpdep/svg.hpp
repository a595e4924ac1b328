#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "smpdep/errors.hpp"

namespace smpdep {

struct ChartSeries {
    std::string name;
    std::vector<double> x, y;
};

namespace svgdetail {

inline std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '&')
            out += "&amp;";
        else if (c == '<')
            out += "&lt;";
        else if (c == '>')
            out += "&gt;";
        else
            out += c;
    }
    return out;
}

inline std::string num(double v, const char* fmt = "%.2f") {
    char buf[48];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

struct Range {
    double lo, hi;
    double place(double v, double a, double b) const { return a + (v - lo) / (hi - lo) * (b - a); }
};

inline Range padded_range(const std::vector<double>& vals) {
    double lo = *std::min_element(vals.begin(), vals.end());
    double hi = *std::max_element(vals.begin(), vals.end());
    double span = hi - lo;
    if (span <= 0.0) span = std::fmax(std::fabs(hi) * 1e-3, 1e-12);
    return {lo - 0.05 * span, hi + 0.05 * span};
}

} // namespace svgdetail

// Static line chart: one stacked panel per series, each with its own
// linear y axis (the metrics live on wildly different scales). No
// scripts, no external references.
inline std::string line_chart_svg(const std::string& title, const std::string& x_label,
                                  const std::vector<ChartSeries>& series) {
    using namespace svgdetail;
    if (series.empty()) throw ConfigError("chart", "needs at least one series");
    for (const auto& s : series)
        if (s.x.empty() || s.x.size() != s.y.size())
            throw ConfigError("chart", "series '" + s.name + "' needs matching x/y data");

    const double width = 640, panel_h = 250;
    const double ml = 95, mr = 20, mt = 36, mb = 46;
    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e"};
    const double height = panel_h * static_cast<double>(series.size()) + 24;

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width, "%.0f") +
           "\" height=\"" + num(height, "%.0f") + "\" viewBox=\"0 0 " + num(width, "%.0f") +
           " " + num(height, "%.0f") + "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out += "<text x=\"" + num(width / 2) +
           "\" y=\"18\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\" "
           "font-weight=\"bold\">" +
           escape(title) + "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const ChartSeries& s = series[k];
        const double top = 24 + panel_h * static_cast<double>(k);
        const double x0 = ml, x1 = width - mr;
        const double y0 = top + panel_h - mb, y1 = top + mt; // y grows upward

        Range rx = padded_range(s.x);
        Range ry = padded_range(s.y);
        const char* color = colors[k % 4];

        out += "<g font-family=\"sans-serif\" font-size=\"11\">\n";
        out += "<text x=\"" + num(x0) + "\" y=\"" + num(top + 16) +
               "\" font-size=\"13\" fill=\"" + color + "\">" + escape(s.name) + "</text>\n";
        // axes
        out += "<line x1=\"" + num(x0) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x1) +
               "\" y2=\"" + num(y0) + "\" stroke=\"black\"/>\n";
        out += "<line x1=\"" + num(x0) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x0) +
               "\" y2=\"" + num(y1) + "\" stroke=\"black\"/>\n";
        // ticks
        for (int t = 0; t <= 4; ++t) {
            double fx = rx.lo + (rx.hi - rx.lo) * t / 4.0;
            double px = rx.place(fx, x0, x1);
            out += "<line x1=\"" + num(px) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(px) +
                   "\" y2=\"" + num(y0 + 4) + "\" stroke=\"black\"/>\n";
            out += "<text x=\"" + num(px) + "\" y=\"" + num(y0 + 17) +
                   "\" text-anchor=\"middle\">" + num(fx, "%.6g") + "</text>\n";
            double fy = ry.lo + (ry.hi - ry.lo) * t / 4.0;
            double py = ry.place(fy, y0, y1);
            out += "<line x1=\"" + num(x0 - 4) + "\" y1=\"" + num(py) + "\" x2=\"" + num(x0) +
                   "\" y2=\"" + num(py) + "\" stroke=\"black\"/>\n";
            out += "<text x=\"" + num(x0 - 7) + "\" y=\"" + num(py + 4) +
                   "\" text-anchor=\"end\">" + num(fy, "%.6g") + "</text>\n";
        }
        out += "<text x=\"" + num((x0 + x1) / 2) + "\" y=\"" + num(y0 + 34) +
               "\" text-anchor=\"middle\" font-size=\"12\">" + escape(x_label) + "</text>\n";

        std::string pts;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            pts += num(rx.place(s.x[i], x0, x1)) + "," + num(ry.place(s.y[i], y0, y1));
            if (i + 1 < s.x.size()) pts += " ";
        }
        out += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color +
               "\" stroke-width=\"1.8\"/>\n";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            out += "<circle cx=\"" + num(rx.place(s.x[i], x0, x1)) + "\" cy=\"" +
                   num(ry.place(s.y[i], y0, y1)) + "\" r=\"2.8\" fill=\"" + color + "\"/>\n";
        out += "</g>\n";
    }
    out += "</svg>\n";
    return out;
}

} // namespace smpdep
