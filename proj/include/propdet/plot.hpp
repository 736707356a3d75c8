#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace propdet {

struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

struct PlotMarker {
  double x = 0;
  double y = 0;
  std::string label;
};

// Static SVG line chart: one polyline per series, axes with ticks, legend,
// and an optional highlighted marker.
void write_line_plot(const std::filesystem::path& path,
                     const std::string& title, const std::string& x_label,
                     const std::string& y_label,
                     const std::vector<PlotSeries>& series,
                     const std::optional<PlotMarker>& marker = std::nullopt);

}  // namespace propdet
