#pragma once

#include <string>
#include <vector>

namespace evofda {

/// One polyline in data coordinates.
struct SvgSeries {
    std::string label; // legend entry; empty hides it from the legend
    std::vector<double> xs;
    std::vector<double> ys;
    std::string color = "#1f77b4";
    double width = 1.5;
    bool dashed = false;
};

/// A filled region between two curves sharing the same x grid, drawn behind
/// every series (e.g. a pointwise confidence band).
struct SvgBand {
    std::vector<double> xs;
    std::vector<double> lower;
    std::vector<double> upper;
    std::string fill = "#1f77b4";
    double opacity = 0.25;
};

struct SvgPlot {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<SvgBand> bands;
    std::vector<SvgSeries> series;
};

/// Renders a complete standalone SVG document with axes, ticks, the bands,
/// the series, and a legend for labeled series. Pure text generation, no
/// external assets. Throws std::invalid_argument when a series or band has
/// mismatched vector lengths or the plot has no points at all.
std::string render_svg(const SvgPlot& plot, int width = 860, int height = 520);

/// Fixed qualitative palette used for per-cluster curves.
const std::vector<std::string>& cluster_palette();

} // namespace evofda
