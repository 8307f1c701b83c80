#pragma once

#include <string>
#include <vector>

namespace eegbench {

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
  bool dashed = false;
};

// Self-contained SVG line chart with axes, ticks and a legend. Non-finite points are skipped.
std::string line_plot_svg(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                          const std::vector<PlotSeries>& series);

}  // namespace eegbench
