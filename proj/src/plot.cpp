#include "propdet/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace propdet {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

}  // namespace

void write_line_plot(const std::filesystem::path& path,
                     const std::string& title, const std::string& x_label,
                     const std::string& y_label,
                     const std::vector<PlotSeries>& series,
                     const std::optional<PlotMarker>& marker) {
  const double width = 860, height = 520;
  const double left = 70, right = 180, top = 50, bottom = 60;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  double x_min = std::numeric_limits<double>::max(), x_max = -x_min;
  double y_min = x_min, y_max = -x_min;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      x_min = std::min(x_min, x); x_max = std::max(x_max, x);
      y_min = std::min(y_min, y); y_max = std::max(y_max, y);
    }
  }
  if (x_min > x_max) { x_min = 0; x_max = 1; y_min = 0; y_max = 1; }
  if (x_max == x_min) x_max = x_min + 1;
  if (y_max == y_min) y_max = y_min + 1;
  const double y_pad = 0.05 * (y_max - y_min);
  y_min -= y_pad; y_max += y_pad;

  auto px = [&](double x) { return left + (x - x_min) / (x_max - x_min) * plot_w; };
  auto py = [&](double y) { return top + (1.0 - (y - y_min) / (y_max - y_min)) * plot_h; };

  std::ofstream out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" font-family=\"sans-serif\">\n";
  out << "<rect width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << left + plot_w / 2 << "\" y=\"28\" font-size=\"16\""
      << " text-anchor=\"middle\">" << title << "</text>\n";

  // frame and ticks
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w
      << "\" height=\"" << plot_h
      << "\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double fx = x_min + (x_max - x_min) * i / 5.0;
    const double fy = y_min + (y_max - y_min) * i / 5.0;
    out << "<line x1=\"" << px(fx) << "\" y1=\"" << top + plot_h << "\" x2=\""
        << px(fx) << "\" y2=\"" << top + plot_h + 5
        << "\" stroke=\"#333\"/>\n";
    out << "<text x=\"" << px(fx) << "\" y=\"" << top + plot_h + 20
        << "\" font-size=\"11\" text-anchor=\"middle\">" << fmt(fx)
        << "</text>\n";
    out << "<line x1=\"" << left - 5 << "\" y1=\"" << py(fy) << "\" x2=\""
        << left << "\" y2=\"" << py(fy) << "\" stroke=\"#333\"/>\n";
    out << "<text x=\"" << left - 9 << "\" y=\"" << py(fy) + 4
        << "\" font-size=\"11\" text-anchor=\"end\">" << fmt(fy)
        << "</text>\n";
  }
  out << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 14
      << "\" font-size=\"13\" text-anchor=\"middle\">" << x_label
      << "</text>\n";
  out << "<text x=\"18\" y=\"" << top + plot_h / 2
      << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << top + plot_h / 2 << ")\">" << y_label << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % (sizeof(kPalette) / sizeof(*kPalette))];
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.8\" points=\"";
    for (const auto& [x, y] : series[s].points) {
      out << px(x) << "," << py(y) << " ";
    }
    out << "\"/>\n";
    const double ly = top + 16 + 18.0 * static_cast<double>(s);
    out << "<line x1=\"" << left + plot_w + 12 << "\" y1=\"" << ly
        << "\" x2=\"" << left + plot_w + 34 << "\" y2=\"" << ly
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << left + plot_w + 40 << "\" y=\"" << ly + 4
        << "\" font-size=\"12\">" << series[s].label << "</text>\n";
  }

  if (marker) {
    out << "<circle cx=\"" << px(marker->x) << "\" cy=\"" << py(marker->y)
        << "\" r=\"5\" fill=\"none\" stroke=\"#000\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << px(marker->x) + 8 << "\" y=\"" << py(marker->y) - 8
        << "\" font-size=\"12\">" << marker->label << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace propdet
