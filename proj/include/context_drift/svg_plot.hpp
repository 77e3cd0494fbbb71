#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace context_drift {

struct CurvePoint {
    std::size_t step = 0;
    double value = 0.0;
    std::string series;
};

/// Minimal line chart rendered as standalone SVG. Every point is emitted as
/// a <circle class="point"> carrying data-series/data-step attributes.
class LinePlot {
public:
    LinePlot(std::string title, std::string x_label, std::string y_label);

    void set_y_range(double lo, double hi);

    /// Throws std::invalid_argument unless steps are strictly increasing.
    void add_series(const std::string& label, const std::vector<CurvePoint>& points);

    std::size_t series_count() const noexcept { return series_.size(); }

    std::string render() const;

private:
    struct Series {
        std::string label;
        std::vector<CurvePoint> points;
    };

    std::string title_;
    std::string x_label_;
    std::string y_label_;
    std::optional<std::pair<double, double>> y_range_;
    std::vector<Series> series_;
};

}  // namespace context_drift
