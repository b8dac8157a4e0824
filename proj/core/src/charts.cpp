#include "oml/charts.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "oml/errors.hpp"

namespace oml {
namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kMarginLeft = 64.0;
constexpr double kMarginRight = 16.0;
constexpr double kMarginTop = 32.0;
constexpr double kMarginBottom = 48.0;
constexpr int kTicks = 5;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", value);
  return buf;
}

}  // namespace

std::string render_line_chart(const std::string& title, const std::string& x_label,
                              const std::string& y_label,
                              const std::vector<ChartSeries>& series) {
  if (series.empty()) throw QueryError("render_line_chart: no series");

  double x_min = std::numeric_limits<double>::infinity();
  double x_max = -x_min;
  double y_min = x_min;
  double y_max = -x_min;
  for (const ChartSeries& s : series) {
    if (s.x.size() != s.y.size() || s.x.empty())
      throw ShapeError("render_line_chart: series '" + s.label + "' is empty or ragged");
    for (double v : s.x) {
      x_min = std::min(x_min, v);
      x_max = std::max(x_max, v);
    }
    for (double v : s.y) {
      y_min = std::min(y_min, v);
      y_max = std::max(y_max, v);
    }
  }
  if (x_max == x_min) x_max = x_min + 1.0;
  if (y_max == y_min) y_max = y_min + 1.0;

  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double plot_h = kHeight - kMarginTop - kMarginBottom;
  const auto sx = [&](double x) { return kMarginLeft + (x - x_min) / (x_max - x_min) * plot_w; };
  const auto sy = [&](double y) {
    return kMarginTop + plot_h - (y - y_min) / (y_max - y_min) * plot_h;
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kWidth) + "\" height=\"" +
         fmt(kHeight) + "\" viewBox=\"0 0 " + fmt(kWidth) + " " + fmt(kHeight) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + fmt(kWidth / 2) + "\" y=\"20\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"14\">" + title + "</text>\n";

  // Axes and ticks.
  svg += "<g stroke=\"#333\" stroke-width=\"1\">\n";
  svg += "<line x1=\"" + fmt(kMarginLeft) + "\" y1=\"" + fmt(kMarginTop + plot_h) + "\" x2=\"" +
         fmt(kMarginLeft + plot_w) + "\" y2=\"" + fmt(kMarginTop + plot_h) + "\"/>\n";
  svg += "<line x1=\"" + fmt(kMarginLeft) + "\" y1=\"" + fmt(kMarginTop) + "\" x2=\"" +
         fmt(kMarginLeft) + "\" y2=\"" + fmt(kMarginTop + plot_h) + "\"/>\n";
  svg += "</g>\n";
  svg += "<g font-family=\"sans-serif\" font-size=\"10\" fill=\"#333\">\n";
  for (int i = 0; i <= kTicks; ++i) {
    const double frac = static_cast<double>(i) / kTicks;
    const double xv = x_min + frac * (x_max - x_min);
    const double yv = y_min + frac * (y_max - y_min);
    svg += "<text x=\"" + fmt(sx(xv)) + "\" y=\"" + fmt(kMarginTop + plot_h + 16) +
           "\" text-anchor=\"middle\">" + fmt(xv) + "</text>\n";
    svg += "<text x=\"" + fmt(kMarginLeft - 6) + "\" y=\"" + fmt(sy(yv) + 3) +
           "\" text-anchor=\"end\">" + fmt(yv) + "</text>\n";
  }
  svg += "<text x=\"" + fmt(kMarginLeft + plot_w / 2) + "\" y=\"" + fmt(kHeight - 10) +
         "\" text-anchor=\"middle\">" + x_label + "</text>\n";
  svg += "<text x=\"14\" y=\"" + fmt(kMarginTop + plot_h / 2) +
         "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " + fmt(kMarginTop + plot_h / 2) +
         ")\">" + y_label + "</text>\n";
  svg += "</g>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
    std::string points;
    for (std::size_t i = 0; i < series[s].x.size(); ++i) {
      if (i) points += ' ';
      points += fmt(sx(series[s].x[i])) + "," + fmt(sy(series[s].y[i]));
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
    const double ly = kMarginTop + 14.0 * static_cast<double>(s);
    svg += "<line x1=\"" + fmt(kMarginLeft + plot_w - 120) + "\" y1=\"" + fmt(ly) + "\" x2=\"" +
           fmt(kMarginLeft + plot_w - 100) + "\" y2=\"" + fmt(ly) + "\" stroke=\"" + color +
           "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + fmt(kMarginLeft + plot_w - 94) + "\" y=\"" + fmt(ly + 3) +
           "\" font-family=\"sans-serif\" font-size=\"10\" fill=\"#333\">" + series[s].label +
           "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace oml
