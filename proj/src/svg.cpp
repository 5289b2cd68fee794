#include "gpmesh/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace gpmesh {
namespace svg {

namespace {

constexpr double kWidth = 720, kHeight = 480;
constexpr double kLeft = 72, kRight = 24, kTop = 40, kBottom = 56;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += ch;
        }
    }
    return out;
}

struct AxisScale {
    double lo = 0, hi = 1;
    bool log = false;

    double to_unit(double v) const {
        if (log) return (std::log10(v) - std::log10(lo)) / (std::log10(hi) - std::log10(lo));
        return (v - lo) / (hi - lo);
    }
};

std::vector<double> nice_ticks(double lo, double hi, bool log) {
    std::vector<double> ticks;
    if (log) {
        const int e0 = static_cast<int>(std::floor(std::log10(lo)));
        const int e1 = static_cast<int>(std::ceil(std::log10(hi)));
        for (int e = e0; e <= e1; ++e) {
            const double t = std::pow(10.0, e);
            if (t >= lo * 0.999 && t <= hi * 1.001) ticks.push_back(t);
        }
        if (ticks.size() < 2) {
            ticks = {lo, hi};
        }
        return ticks;
    }
    const double span = hi - lo;
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        if (raw <= m * mag) {
            step = m * mag;
            break;
        }
    }
    const double first = std::ceil(lo / step) * step;
    for (double t = first; t <= hi + 1e-9 * span; t += step) ticks.push_back(t);
    return ticks;
}

}  // namespace

void write_chart(const ChartSpec& spec, const std::filesystem::path& path) {
    // collect finite data, dropping non-positive values on log scales
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    bool any = false;
    for (const auto& s : spec.series) {
        for (const auto& [x, y] : s.points) {
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            if (spec.log_x && x <= 0.0) continue;
            if (spec.log_y && y <= 0.0) continue;
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
            any = true;
        }
    }
    if (!any) throw std::runtime_error("chart has no plottable data");
    if (xmin == xmax) {
        xmin -= spec.log_x ? 0.0 : 0.5;
        xmax += 0.5;
        if (spec.log_x) xmin = xmax / 10.0;
    }
    if (ymin == ymax) {
        ymin -= spec.log_y ? 0.0 : 0.5;
        ymax += 0.5;
        if (spec.log_y) ymin = ymax / 10.0;
    }
    if (!spec.log_y) {
        const double pad = 0.05 * (ymax - ymin);
        ymin -= pad;
        ymax += pad;
    } else {
        ymin /= 1.5;
        ymax *= 1.5;
    }
    const AxisScale xs{xmin, xmax, spec.log_x};
    const AxisScale ys{ymin, ymax, spec.log_y};
    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    auto px = [&](double v) { return kLeft + xs.to_unit(v) * pw; };
    auto py = [&](double v) { return kTop + (1.0 - ys.to_unit(v)) * ph; };

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<!-- gpmesh chart format 1 -->\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\""
        << num(kHeight) << "\" viewBox=\"0 0 " << num(kWidth) << " " << num(kHeight) << "\">\n";
    out << "<rect width=\"" << num(kWidth) << "\" height=\"" << num(kHeight)
        << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << num(kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"16\">" << escape(spec.title) << "</text>\n";

    // frame and ticks
    out << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw)
        << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"#333333\"/>\n";
    for (double t : nice_ticks(xmin, xmax, spec.log_x)) {
        const double x = px(t);
        out << "<line x1=\"" << num(x) << "\" y1=\"" << num(kTop + ph) << "\" x2=\"" << num(x)
            << "\" y2=\"" << num(kTop + ph + 5) << "\" stroke=\"#333333\"/>\n";
        out << "<text x=\"" << num(x) << "\" y=\"" << num(kTop + ph + 20)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << num(t)
            << "</text>\n";
    }
    for (double t : nice_ticks(ymin, ymax, spec.log_y)) {
        const double y = py(t);
        out << "<line x1=\"" << num(kLeft - 5) << "\" y1=\"" << num(y) << "\" x2=\"" << num(kLeft)
            << "\" y2=\"" << num(y) << "\" stroke=\"#333333\"/>\n";
        out << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(y + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << num(t)
            << "</text>\n";
    }
    out << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 12)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
        << escape(spec.x_label) << "</text>\n";
    out << "<text x=\"16\" y=\"" << num(kTop + ph / 2)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
        << "transform=\"rotate(-90 16 " << num(kTop + ph / 2) << ")\">" << escape(spec.y_label)
        << "</text>\n";

    int color_index = 0;
    for (const auto& s : spec.series) {
        const std::string color = kPalette[color_index % 8];
        ++color_index;
        std::vector<std::pair<double, double>> pts;
        for (const auto& [x, y] : s.points) {
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            if (spec.log_x && x <= 0.0) continue;
            if (spec.log_y && y <= 0.0) continue;
            pts.emplace_back(px(x), py(y));
        }
        if (pts.empty()) continue;
        if (s.kind == Series::Kind::Line && pts.size() > 1) {
            out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
            for (const auto& [x, y] : pts) out << num(x) << "," << num(y) << " ";
            out << "\"/>\n";
        } else {
            for (const auto& [x, y] : pts)
                out << "<circle cx=\"" << num(x) << "\" cy=\"" << num(y)
                    << "\" r=\"3\" fill=\"" << color << "\"/>\n";
        }
    }

    // legend
    double ly = kTop + 12;
    color_index = 0;
    for (const auto& s : spec.series) {
        const std::string color = kPalette[color_index % 8];
        ++color_index;
        if (s.label.empty()) continue;
        out << "<rect x=\"" << num(kLeft + pw - 160) << "\" y=\"" << num(ly - 8)
            << "\" width=\"10\" height=\"10\" fill=\"" << color << "\"/>\n";
        out << "<text x=\"" << num(kLeft + pw - 146) << "\" y=\"" << num(ly + 1)
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape(s.label) << "</text>\n";
        ly += 16;
    }
    out << "</svg>\n";
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace svg
}  // namespace gpmesh
