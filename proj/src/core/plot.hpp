#pragma once

#include <string>
#include <vector>

namespace spsim {

struct PlotSeries {
  std::vector<double> x;
  std::vector<double> y;
  std::string label;
  bool markers = false; // scatter instead of a polyline
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
};

/// Fixed-style SVG. Identical input gives identical bytes.
std::string render_svg(const PlotSpec& spec);

} // namespace spsim
