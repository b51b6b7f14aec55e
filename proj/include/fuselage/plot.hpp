#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fuselage {

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 640;
  int height = 420;
};

// Self-contained SVG documents. Axis ranges cover every finite point; NaN
// and infinite points are skipped.
std::string svg_line_plot(const PlotSpec& spec, std::span<const Series> series);
std::string svg_scatter_plot(const PlotSpec& spec, std::span<const Series> series);

}  // namespace fuselage
