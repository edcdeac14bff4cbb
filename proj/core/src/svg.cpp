#include "evofda/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace evofda {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c; break;
        }
    }
    return out;
}

/// Maps data coordinates into the plot viewport; SVG y grows downward.
struct Viewport {
    double px, py, pw, ph;
    double x_min, x_max, y_min, y_max;

    double x(double v) const { return px + (v - x_min) / (x_max - x_min) * pw; }
    double y(double v) const { return py + ph - (v - y_min) / (y_max - y_min) * ph; }
};

/// Tick positions at a "nice" step (1/2/5 times a power of ten).
std::vector<double> nice_ticks(double lo, double hi, int target) {
    const double raw = (hi - lo) / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double norm = raw / mag;
    const double step = mag * (norm < 1.5 ? 1 : norm < 3 ? 2 : norm < 7 ? 5 : 10);
    std::vector<double> ticks;
    for (double t = std::ceil(lo / step) * step; t <= hi + step * 1e-9; t += step) {
        // snap values that are zero up to rounding so labels print "0"
        ticks.push_back(std::abs(t) < step * 1e-9 ? 0.0 : t);
    }
    return ticks;
}

void extend_range(double& lo, double& hi, const std::vector<double>& values) {
    for (double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
}

std::string polyline_points(const Viewport& vp, const std::vector<double>& xs,
                            const std::vector<double>& ys) {
    std::string points;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!points.empty()) points += ' ';
        points += fmt(vp.x(xs[i])) + "," + fmt(vp.y(ys[i]));
    }
    return points;
}

} // namespace

const std::vector<std::string>& cluster_palette() {
    static const std::vector<std::string> palette = {
        "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
    };
    return palette;
}

std::string render_svg(const SvgPlot& plot, int width, int height) {
    double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
    double y_lo = x_lo, y_hi = -x_lo;
    for (const SvgBand& band : plot.bands) {
        if (band.xs.size() != band.lower.size() || band.xs.size() != band.upper.size())
            throw std::invalid_argument("render_svg: band vectors differ in length");
        extend_range(x_lo, x_hi, band.xs);
        extend_range(y_lo, y_hi, band.lower);
        extend_range(y_lo, y_hi, band.upper);
    }
    for (const SvgSeries& series : plot.series) {
        if (series.xs.size() != series.ys.size())
            throw std::invalid_argument("render_svg: series vectors differ in length");
        extend_range(x_lo, x_hi, series.xs);
        extend_range(y_lo, y_hi, series.ys);
    }
    if (!(x_lo <= x_hi) || !(y_lo <= y_hi))
        throw std::invalid_argument("render_svg: nothing to plot");
    if (x_lo == x_hi) {
        x_lo -= 1;
        x_hi += 1;
    }
    if (y_lo == y_hi) {
        y_lo -= 1;
        y_hi += 1;
    }
    const double y_pad = (y_hi - y_lo) * 0.05;
    y_lo -= y_pad;
    y_hi += y_pad;

    const Viewport vp{70, 45, double(width) - 95, double(height) - 95, x_lo, x_hi, y_lo, y_hi};
    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
           "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " + std::to_string(width) +
           " " + std::to_string(height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!plot.title.empty())
        svg += "<text x=\"" + fmt(width / 2.0) +
               "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
               xml_escape(plot.title) + "</text>\n";

    // axes box and ticks
    svg += "<rect x=\"" + fmt(vp.px) + "\" y=\"" + fmt(vp.py) + "\" width=\"" + fmt(vp.pw) +
           "\" height=\"" + fmt(vp.ph) + "\" fill=\"none\" stroke=\"#333\"/>\n";
    for (double t : nice_ticks(x_lo, x_hi, 7)) {
        const double px = vp.x(t);
        svg += "<line x1=\"" + fmt(px) + "\" y1=\"" + fmt(vp.py + vp.ph) + "\" x2=\"" + fmt(px) +
               "\" y2=\"" + fmt(vp.py + vp.ph + 5) + "\" stroke=\"#333\"/>\n";
        svg += "<text x=\"" + fmt(px) + "\" y=\"" + fmt(vp.py + vp.ph + 20) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + fmt(t) +
               "</text>\n";
    }
    for (double t : nice_ticks(y_lo, y_hi, 6)) {
        const double py = vp.y(t);
        svg += "<line x1=\"" + fmt(vp.px - 5) + "\" y1=\"" + fmt(py) + "\" x2=\"" + fmt(vp.px) +
               "\" y2=\"" + fmt(py) + "\" stroke=\"#333\"/>\n";
        svg += "<text x=\"" + fmt(vp.px - 9) + "\" y=\"" + fmt(py + 4) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" + fmt(t) +
               "</text>\n";
    }
    if (!plot.x_label.empty())
        svg += "<text x=\"" + fmt(vp.px + vp.pw / 2) + "\" y=\"" + fmt(double(height) - 8) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" +
               xml_escape(plot.x_label) + "</text>\n";
    if (!plot.y_label.empty())
        svg += "<text x=\"16\" y=\"" + fmt(vp.py + vp.ph / 2) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 16 " +
               fmt(vp.py + vp.ph / 2) + ")\">" + xml_escape(plot.y_label) + "</text>\n";

    for (const SvgBand& band : plot.bands) {
        // upper curve forward, lower curve back, closed into one polygon
        std::string points;
        for (std::size_t i = 0; i < band.xs.size(); ++i) {
            if (!points.empty()) points += ' ';
            points += fmt(vp.x(band.xs[i])) + "," + fmt(vp.y(band.upper[i]));
        }
        for (std::size_t i = band.xs.size(); i-- > 0;) {
            points += ' ';
            points += fmt(vp.x(band.xs[i])) + "," + fmt(vp.y(band.lower[i]));
        }
        svg += "<polygon points=\"" + points + "\" fill=\"" + band.fill + "\" opacity=\"" +
               fmt(band.opacity) + "\" stroke=\"none\"/>\n";
    }
    for (const SvgSeries& series : plot.series) {
        svg += "<polyline points=\"" + polyline_points(vp, series.xs, series.ys) +
               "\" fill=\"none\" stroke=\"" + series.color + "\" stroke-width=\"" +
               fmt(series.width) + "\"";
        if (series.dashed) svg += " stroke-dasharray=\"6 4\"";
        svg += "/>\n";
    }

    double legend_y = vp.py + 14;
    for (const SvgSeries& series : plot.series) {
        if (series.label.empty()) continue;
        const double lx = vp.px + vp.pw - 150;
        svg += "<line x1=\"" + fmt(lx) + "\" y1=\"" + fmt(legend_y - 4) + "\" x2=\"" +
               fmt(lx + 26) + "\" y2=\"" + fmt(legend_y - 4) + "\" stroke=\"" + series.color +
               "\" stroke-width=\"" + fmt(series.width) + "\"";
        if (series.dashed) svg += " stroke-dasharray=\"6 4\"";
        svg += "/>\n";
        svg += "<text x=\"" + fmt(lx + 32) + "\" y=\"" + fmt(legend_y) +
               "\" font-family=\"sans-serif\" font-size=\"12\">" + xml_escape(series.label) +
               "</text>\n";
        legend_y += 17;
    }

    svg += "</svg>\n";
    return svg;
}

} // namespace evofda
