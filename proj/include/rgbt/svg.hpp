#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace rgbt {

// Self-contained SVG charts; no renderer dependencies, deterministic bytes.

struct PlotSeries {
  std::string label;
  std::vector<double> xs;
  std::vector<double> ys;  // same length as xs
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
  // Used when min < max, otherwise fitted to the data.
  double y_min = 0.0;
  double y_max = 0.0;
};

void write_line_plot(const std::filesystem::path& path, const PlotSpec& spec);

struct BarSpec {
  std::string title;
  std::string y_label;
  std::vector<std::string> labels;
  std::vector<double> values;  // same length as labels
  double y_min = 0.0;
  double y_max = 0.0;
};

void write_bar_plot(const std::filesystem::path& path, const BarSpec& spec);

}  // namespace rgbt
