#include "context_drift/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace context_drift {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 170.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    if (std::fabs(v - std::round(v)) < 1e-9 && std::fabs(v) >= 1.0) {
        std::snprintf(buf, sizeof buf, "%.0f", v);
    } else {
        std::snprintf(buf, sizeof buf, "%.2g", v);
    }
    return buf;
}

}  // namespace

LinePlot::LinePlot(std::string title, std::string x_label, std::string y_label)
    : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

void LinePlot::set_y_range(double lo, double hi) {
    if (!(hi > lo)) {
        throw std::invalid_argument("y range must be increasing");
    }
    y_range_ = std::make_pair(lo, hi);
}

void LinePlot::add_series(const std::string& label, const std::vector<CurvePoint>& points) {
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (points[i].step <= points[i - 1].step) {
            throw std::invalid_argument("series '" + label + "': steps must be strictly increasing");
        }
    }
    series_.push_back(Series{label, points});
}

std::string LinePlot::render() const {
    std::size_t max_step = 1;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& s : series_) {
        for (const auto& p : s.points) {
            max_step = std::max(max_step, p.step);
            lo = std::min(lo, p.value);
            hi = std::max(hi, p.value);
        }
    }
    if (y_range_) {
        lo = y_range_->first;
        hi = y_range_->second;
    } else if (!std::isfinite(lo)) {
        lo = 0.0;
        hi = 1.0;
    } else {
        lo = std::min(lo, 0.0);
        hi = hi > lo ? hi * 1.05 : lo + 1.0;
    }

    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    auto x_of = [&](std::size_t step) { return kLeft + plot_w * static_cast<double>(step) / static_cast<double>(max_step); };
    auto y_of = [&](double v) { return kTop + plot_h * (1.0 - (v - lo) / (hi - lo)); };

    std::ostringstream svg;
    svg << R"(<svg xmlns="http://www.w3.org/2000/svg" width=")" << kWidth << R"(" height=")" << kHeight
        << R"(" viewBox="0 0 )" << kWidth << ' ' << kHeight << R"(" font-family="sans-serif" font-size="12">)" << '\n';
    svg << R"(<rect width="100%" height="100%" fill="white"/>)" << '\n';
    svg << R"(<text x=")" << fmt(kWidth / 2 - kRight / 2 + kLeft / 2) << R"(" y="22" text-anchor="middle" font-size="15">)"
        << escape_xml(title_) << "</text>\n";

    // Axes and grid.
    svg << R"(<g class="axes" stroke="#444" stroke-width="1">)" << '\n';
    svg << R"(<line x1=")" << fmt(kLeft) << R"(" y1=")" << fmt(kTop + plot_h) << R"(" x2=")" << fmt(kLeft + plot_w)
        << R"(" y2=")" << fmt(kTop + plot_h) << R"("/>)" << '\n';
    svg << R"(<line x1=")" << fmt(kLeft) << R"(" y1=")" << fmt(kTop) << R"(" x2=")" << fmt(kLeft) << R"(" y2=")"
        << fmt(kTop + plot_h) << R"("/>)" << '\n';
    svg << "</g>\n";

    constexpr int y_ticks = 5;
    for (int t = 0; t <= y_ticks; ++t) {
        const double v = lo + (hi - lo) * t / y_ticks;
        const double y = y_of(v);
        svg << R"(<line x1=")" << fmt(kLeft) << R"(" y1=")" << fmt(y) << R"(" x2=")" << fmt(kLeft + plot_w)
            << R"(" y2=")" << fmt(y) << R"(" stroke="#ddd"/>)" << '\n';
        svg << R"(<text x=")" << fmt(kLeft - 6) << R"(" y=")" << fmt(y + 4) << R"(" text-anchor="end">)"
            << tick_label(v) << "</text>\n";
    }
    const std::size_t x_stride = std::max<std::size_t>(1, (max_step + 9) / 10);
    for (std::size_t s = 0; s <= max_step; s += x_stride) {
        svg << R"(<text x=")" << fmt(x_of(s)) << R"(" y=")" << fmt(kTop + plot_h + 18) << R"(" text-anchor="middle">)"
            << s << "</text>\n";
    }
    svg << R"(<text x=")" << fmt(kLeft + plot_w / 2) << R"(" y=")" << fmt(kHeight - 18) << R"(" text-anchor="middle">)"
        << escape_xml(x_label_) << "</text>\n";
    svg << R"(<text transform="translate(18 )" << fmt(kTop + plot_h / 2) << R"x() rotate(-90)" text-anchor="middle">)x"
        << escape_xml(y_label_) << "</text>\n";

    for (std::size_t i = 0; i < series_.size(); ++i) {
        const auto& s = series_[i];
        const char* color = kPalette[i % std::size(kPalette)];
        const std::string label = escape_xml(s.label);
        svg << R"(<g class="series" data-series=")" << label << R"(">)" << '\n';
        svg << R"(<polyline fill="none" stroke=")" << color << R"(" stroke-width="2" points=")";
        for (std::size_t k = 0; k < s.points.size(); ++k) {
            svg << (k > 0 ? " " : "") << fmt(x_of(s.points[k].step)) << ',' << fmt(y_of(s.points[k].value));
        }
        svg << R"("/>)" << '\n';
        for (const auto& p : s.points) {
            svg << R"(<circle class="point" data-series=")" << label << R"(" data-step=")" << p.step
                << R"(" data-value=")" << p.value << R"(" cx=")" << fmt(x_of(p.step)) << R"(" cy=")" << fmt(y_of(p.value))
                << R"(" r="3" fill=")" << color << R"("/>)" << '\n';
        }
        svg << "</g>\n";
        const double ly = kTop + 14.0 + 18.0 * static_cast<double>(i);
        const double lx = kLeft + plot_w + 16.0;
        svg << R"(<line x1=")" << fmt(lx) << R"(" y1=")" << fmt(ly - 4) << R"(" x2=")" << fmt(lx + 20) << R"(" y2=")"
            << fmt(ly - 4) << R"(" stroke=")" << color << R"(" stroke-width="2"/>)" << '\n';
        svg << R"(<text x=")" << fmt(lx + 26) << R"(" y=")" << fmt(ly) << R"(">)" << label << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace context_drift
