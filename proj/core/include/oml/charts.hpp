#pragma once

#include <string>
#include <vector>

namespace oml {

struct ChartSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Renders a line chart as a standalone SVG document: axes, tick labels,
/// one polyline per series, and a legend. Purely textual, so outputs are
/// diffable and deterministic.
std::string render_line_chart(const std::string& title, const std::string& x_label,
                              const std::string& y_label,
                              const std::vector<ChartSeries>& series);

}  // namespace oml
