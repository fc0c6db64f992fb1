#include "dnsp/plot.hpp"

#include "dnsp/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dnsp {

namespace {

constexpr double width = 640.0;
constexpr double height = 420.0;
constexpr double left = 80.0;
constexpr double right = 20.0;
constexpr double top = 40.0;
constexpr double bottom = 60.0;

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

struct Axis {
    double lo;
    double hi;

    Axis(double a, double b) : lo(a), hi(b) {
        if (!(hi > lo)) {
            const double pad = std::abs(lo) > 0.0 ? 0.05 * std::abs(lo) : 1.0;
            lo -= pad;
            hi += pad;
        }
    }
    [[nodiscard]] double frac(double v) const { return (v - lo) / (hi - lo); }
};

} // namespace

std::string line_plot_svg(const std::vector<double>& x, const std::vector<double>& y, const PlotLabels& labels) {
    if (x.empty() || x.size() != y.size()) {
        throw DimensionError("line_plot_svg: series must be nonempty and of equal length");
    }
    const auto [xmin, xmax] = std::minmax_element(x.begin(), x.end());
    const auto [ymin, ymax] = std::minmax_element(y.begin(), y.end());
    const Axis ax(*xmin, *xmax);
    const Axis ay(*ymin, *ymax);
    const double pw = width - left - right;
    const double ph = height - top - bottom;
    auto px = [&](double v) { return left + ax.frac(v) * pw; };
    auto py = [&](double v) { return top + (1.0 - ay.frac(v)) * ph; };

    std::ostringstream os;
    os.precision(6);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << escape(labels.title)
       << "</text>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph
       << "\" stroke=\"black\"/>\n";
    constexpr int ticks = 5;
    for (int i = 0; i < ticks; ++i) {
        const double t = static_cast<double>(i) / (ticks - 1);
        const double xv = ax.lo + t * (ax.hi - ax.lo);
        const double yv = ay.lo + t * (ay.hi - ay.lo);
        os << "<text x=\"" << px(xv) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">" << xv << "</text>\n";
        os << "<text x=\"" << left - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << yv << "</text>\n";
    }
    os << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 16 << "\" text-anchor=\"middle\">"
       << escape(labels.x_label) << "</text>\n";
    os << "<text transform=\"translate(18 " << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
       << escape(labels.y_label) << "</text>\n";
    os << "<polyline fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < x.size(); ++i) {
        os << (i ? " " : "") << px(x[i]) << ',' << py(y[i]);
    }
    os << "\"/>\n";
    for (std::size_t i = 0; i < x.size(); ++i) {
        os << "<circle cx=\"" << px(x[i]) << "\" cy=\"" << py(y[i]) << "\" r=\"3\" fill=\"#1f5fa8\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

} // namespace dnsp
