#pragma once

// Minimal static SVG output for the two report charts: the within-segment speed
// distribution and grouped per-participant bars. No external renderer involved;
// files are plain SVG 1.1.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gaze2afc/csv.hpp"
#include "gaze2afc/error.hpp"
#include "gaze2afc/kinematics.hpp"

namespace gaze2afc::svg {

namespace detail {

inline const std::vector<std::string>& palette() {
    static const std::vector<std::string> p = {"#4c72b0", "#dd8452", "#55a868", "#c44e52",
                                               "#8172b3", "#937860", "#da8bc3", "#8c8c8c"};
    return p;
}

inline std::string esc(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        default: out += c;
        }
    }
    return out;
}

/// Tick step from the 1-2-5 ladder giving roughly `target` divisions.
inline double nice_step(double span, int target) {
    if (span <= 0.0) return 1.0;
    const double raw = span / std::max(1, target);
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        if (mag * m >= raw) return mag * m;
    }
    return mag * 10.0;
}

struct Frame {
    double width = 860, height = 460;
    double left = 64, right = 20, top = 36, bottom = 52;
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;

    double px(double x) const { return left + (x - x0) / (x1 - x0) * (width - left - right); }
    double py(double y) const { return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom); }
};

inline void open_svg(std::ostringstream& s, const Frame& f) {
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width << "\" height=\""
      << f.height << "\" viewBox=\"0 0 " << f.width << " " << f.height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
}

inline void close_svg(std::ostringstream& s) { s << "</g>\n</svg>\n"; }

inline void axes(std::ostringstream& s, const Frame& f, const std::string& xlabel,
                 const std::string& ylabel, const std::string& title) {
    const double bx = f.px(f.x0), by = f.py(f.y0), ex = f.px(f.x1), ey = f.py(f.y1);
    s << "<line x1=\"" << bx << "\" y1=\"" << by << "\" x2=\"" << ex << "\" y2=\"" << by
      << "\" stroke=\"#333\"/>\n";
    s << "<line x1=\"" << bx << "\" y1=\"" << by << "\" x2=\"" << bx << "\" y2=\"" << ey
      << "\" stroke=\"#333\"/>\n";

    const double xs = nice_step(f.x1 - f.x0, 8);
    for (double v = std::ceil(f.x0 / xs) * xs; v <= f.x1 + 1e-9; v += xs) {
        const double p = f.px(v);
        s << "<line x1=\"" << p << "\" y1=\"" << by << "\" x2=\"" << p << "\" y2=\"" << by + 4
          << "\" stroke=\"#333\"/>\n";
        s << "<text x=\"" << p << "\" y=\"" << by + 17 << "\" text-anchor=\"middle\">"
          << fmt_fixed(v, xs < 1 ? 1 : 0) << "</text>\n";
    }
    const double ys = nice_step(f.y1 - f.y0, 6);
    for (double v = std::ceil(f.y0 / ys - 1e-9) * ys; v <= f.y1 + 1e-9; v += ys) {
        const double p = f.py(v);
        s << "<line x1=\"" << bx - 4 << "\" y1=\"" << p << "\" x2=\"" << bx << "\" y2=\"" << p
          << "\" stroke=\"#333\"/>\n";
        s << "<text x=\"" << bx - 7 << "\" y=\"" << p + 4 << "\" text-anchor=\"end\">"
          << fmt_fixed(v, ys < 0.95 ? (ys < 0.095 ? (ys < 0.0095 ? 3 : 2) : 1) : 0)
          << "</text>\n";
        if (std::abs(v) < ys * 1e-6 && f.y0 < 0.0)
            s << "<line x1=\"" << bx << "\" y1=\"" << p << "\" x2=\"" << ex << "\" y2=\"" << p
              << "\" stroke=\"#999\" stroke-dasharray=\"3,3\"/>\n";
    }
    s << "<text x=\"" << (bx + ex) / 2 << "\" y=\"" << by + 38
      << "\" text-anchor=\"middle\">" << esc(xlabel) << "</text>\n";
    s << "<text x=\"16\" y=\"" << (by + ey) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << (by + ey) / 2 << ")\">" << esc(ylabel) << "</text>\n";
    s << "<text x=\"" << (bx + ex) / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
      << esc(title) << "</text>\n";
}

inline void write_file(const std::ostringstream& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << s.str();
}

} // namespace detail

struct NamedHistogram {
    std::string participant;
    kinematics::SpeedHistogram hist;
};

/// Speed distribution chart: bars for the first participant, KDE curves for all.
inline void write_speed_chart(const std::vector<NamedHistogram>& hists, const std::string& path,
                              double xmax_hint = 0.0) {
    if (hists.empty()) throw Error("no histograms to draw");
    detail::Frame f;
    double xmax = xmax_hint, ymax = 0.0;
    for (const auto& h : hists) {
        if (xmax_hint <= 0.0 && !h.hist.bin_edges.empty())
            xmax = std::max(xmax, h.hist.bin_edges.back());
        for (double d : h.hist.density) ymax = std::max(ymax, d);
        for (double d : h.hist.kde_y) ymax = std::max(ymax, d);
    }
    if (xmax <= 0.0) xmax = 1.0;
    if (ymax <= 0.0) ymax = 1.0;
    f.x0 = 0.0;
    f.x1 = xmax;
    f.y0 = 0.0;
    f.y1 = ymax * 1.08;

    std::ostringstream s;
    detail::open_svg(s, f);
    detail::axes(s, f, "speed [deg/s]", "density", "Within-segment gaze speed");

    const auto& h0 = hists[0].hist;
    for (std::size_t b = 0; b + 1 < h0.bin_edges.size(); ++b) {
        if (h0.bin_edges[b] > f.x1) break;
        const double x = f.px(h0.bin_edges[b]);
        const double wdt = f.px(std::min(h0.bin_edges[b + 1], f.x1)) - x;
        const double y = f.py(h0.density[b]);
        s << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << wdt << "\" height=\""
          << f.py(0.0) - y << "\" fill=\"#b8cbe4\" stroke=\"none\"/>\n";
    }

    for (std::size_t i = 0; i < hists.size(); ++i) {
        const auto& h = hists[i].hist;
        const std::string& col = detail::palette()[i % detail::palette().size()];
        s << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.6\" points=\"";
        for (std::size_t k = 0; k < h.kde_x.size(); ++k) {
            if (h.kde_x[k] > f.x1) break;
            s << f.px(h.kde_x[k]) << "," << f.py(h.kde_y[k]) << " ";
        }
        s << "\"/>\n";
        const double mode = h.mode_speed();
        if (mode <= f.x1)
            s << "<line x1=\"" << f.px(mode) << "\" y1=\"" << f.py(0.0) << "\" x2=\""
              << f.px(mode) << "\" y2=\"" << f.py(f.y1 * 0.93)
              << "\" stroke=\"" << col << "\" stroke-dasharray=\"4,3\"/>\n";
        s << "<text x=\"" << f.px(f.x1) - 6 << "\" y=\"" << f.py(f.y1) + 14 + 15 * static_cast<double>(i)
          << "\" text-anchor=\"end\" fill=\"" << col << "\">" << detail::esc(hists[i].participant)
          << " (mode " << fmt_fixed(mode, 1) << ")</text>\n";
    }

    detail::close_svg(s);
    detail::write_file(s, path);
}

struct BarGroup {
    std::string label;                 // one group per participant
    std::vector<double> values;        // one value per series
    std::string annotation;            // optional note above the group
};

/// Grouped bar chart; handles negative values (baseline at zero).
inline void write_bar_chart(const std::string& title, const std::string& ylabel,
                            const std::vector<std::string>& series,
                            const std::vector<BarGroup>& groups, const std::string& path) {
    if (groups.empty()) throw Error("no bar groups to draw");
    detail::Frame f;
    f.width = std::max(480.0, 140.0 + 34.0 * static_cast<double>(series.size() * groups.size()));
    double lo = 0.0, hi = 0.0;
    for (const auto& g : groups)
        for (double v : g.values) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    if (hi == lo) hi = lo + 1.0;
    const double pad = (hi - lo) * 0.10;
    f.y0 = lo < 0.0 ? lo - pad : 0.0;
    f.y1 = hi + pad;
    f.x0 = 0.0;
    f.x1 = static_cast<double>(groups.size());

    std::ostringstream s;
    detail::open_svg(s, f);
    const double bx = f.px(f.x0), by = f.py(f.y0), ex = f.px(f.x1), ey = f.py(f.y1);
    s << "<line x1=\"" << bx << "\" y1=\"" << by << "\" x2=\"" << ex << "\" y2=\"" << by
      << "\" stroke=\"#333\"/>\n";
    s << "<line x1=\"" << bx << "\" y1=\"" << by << "\" x2=\"" << bx << "\" y2=\"" << ey
      << "\" stroke=\"#333\"/>\n";
    const double ys = detail::nice_step(f.y1 - f.y0, 6);
    for (double v = std::ceil(f.y0 / ys - 1e-9) * ys; v <= f.y1 + 1e-9; v += ys) {
        const double p = f.py(v);
        s << "<line x1=\"" << bx - 4 << "\" y1=\"" << p << "\" x2=\"" << bx << "\" y2=\"" << p
          << "\" stroke=\"#333\"/>\n";
        s << "<text x=\"" << bx - 7 << "\" y=\"" << p + 4 << "\" text-anchor=\"end\">"
          << fmt_fixed(v, ys < 0.95 ? (ys < 0.095 ? 3 : 2) : 0) << "</text>\n";
    }
    const double zero = f.py(std::max(0.0, f.y0));
    s << "<line x1=\"" << bx << "\" y1=\"" << zero << "\" x2=\"" << ex << "\" y2=\"" << zero
      << "\" stroke=\"#999\"/>\n";
    s << "<text x=\"16\" y=\"" << (by + ey) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << (by + ey) / 2 << ")\">" << detail::esc(ylabel) << "</text>\n";
    s << "<text x=\"" << (bx + ex) / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
      << detail::esc(title) << "</text>\n";

    const std::size_t ns = std::max<std::size_t>(1, series.size());
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const double g0 = static_cast<double>(g) + 0.08, g1 = static_cast<double>(g) + 0.92;
        const double bw = (g1 - g0) / static_cast<double>(ns);
        for (std::size_t k = 0; k < groups[g].values.size() && k < ns; ++k) {
            const double v = groups[g].values[k];
            const double x = f.px(g0 + bw * static_cast<double>(k));
            const double wdt = f.px(g0 + bw * static_cast<double>(k + 1)) - x;
            const double ytop = f.py(std::max(v, 0.0));
            const double ybot = f.py(std::min(v, 0.0));
            s << "<rect x=\"" << x << "\" y=\"" << ytop << "\" width=\"" << wdt * 0.9
              << "\" height=\"" << std::max(0.5, ybot - ytop) << "\" fill=\""
              << detail::palette()[k % detail::palette().size()] << "\"/>\n";
        }
        s << "<text x=\"" << f.px(static_cast<double>(g) + 0.5) << "\" y=\"" << by + 17
          << "\" text-anchor=\"middle\">" << detail::esc(groups[g].label) << "</text>\n";
        if (!groups[g].annotation.empty())
            s << "<text x=\"" << f.px(static_cast<double>(g) + 0.5) << "\" y=\"" << ey - 6
              << "\" text-anchor=\"middle\" fill=\"#555\" font-size=\"11\">"
              << detail::esc(groups[g].annotation) << "</text>\n";
    }
    for (std::size_t k = 0; k < series.size(); ++k) {
        const double lx = ex - 150.0, ly = ey + 16.0 + 16.0 * static_cast<double>(k);
        s << "<rect x=\"" << lx << "\" y=\"" << ly - 9 << "\" width=\"10\" height=\"10\" fill=\""
          << detail::palette()[k % detail::palette().size()] << "\"/>\n";
        s << "<text x=\"" << lx + 14 << "\" y=\"" << ly << "\">" << detail::esc(series[k])
          << "</text>\n";
    }
    detail::close_svg(s);
    detail::write_file(s, path);
}

} // namespace gaze2afc::svg
