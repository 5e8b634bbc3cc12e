#pragma once

#include <string>
#include <vector>

namespace sheforge::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  bool bars = false; // draw the first series as vertical bars
  int width = 800;
  int height = 450;
};

// Self-contained SVG document for a line (or bar) chart.
std::string render(const Chart &chart);

} // namespace sheforge::svg
