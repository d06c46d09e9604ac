#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gbpinn {

using NamedSeries = std::pair<std::string, std::span<const double>>;

// Multi-series line chart. With log_y, positive data is drawn on a log10
// axis; if any value is non-positive the chart falls back to linear.
std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           std::span<const double> xs,
                           const std::vector<NamedSeries>& series,
                           bool log_y = false);

// Side-by-side heatmap panels over a shared extent. `values` are x-major
// (shape[0] rows of shape[1] values); axes larger than `max_axis` cells are
// strided down before drawing. Each panel is normalized to its own range,
// annotated with min/max, and rendered with the viridis colormap.
std::string svg_heatmaps(const std::string& title,
                         std::span<const std::size_t> shape,
                         std::array<double, 2> x_range,
                         std::array<double, 2> y_range,
                         const std::vector<NamedSeries>& panels,
                         std::size_t max_axis = 128);

}  // namespace gbpinn
