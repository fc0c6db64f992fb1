#pragma once

#include <string>
#include <vector>

namespace dnsp {

struct PlotLabels {
    std::string title;
    std::string x_label;
    std::string y_label;
};

/// Standalone SVG document with one polyline through (x[i], y[i]) in the given order.
/// Throws DimensionError when the series are empty or of different lengths.
std::string line_plot_svg(const std::vector<double>& x, const std::vector<double>& y, const PlotLabels& labels);

} // namespace dnsp
