#pragma once

#include <string>
#include <vector>

namespace wgdet {

/// One polyline. `lower`/`upper` describe an optional shaded band and must be
/// empty or the same length as `x`.
struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> lower;
  std::vector<double> upper;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = true;
  std::vector<PlotSeries> series;
};

/// Standalone SVG document. Non-finite points (and non-positive ones on a log
/// axis) are skipped.
std::string render_svg(const PlotSpec& spec);

}  // namespace wgdet
