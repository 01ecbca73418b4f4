#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kgicu/gnn.hpp"

namespace kgicu::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> y_std;  // optional shaded band, empty or |y|
  std::string color = "#1f77b4";
  bool step = false;  // draw as a step function (label overlays)
};

// Simple line chart with axes, ticks and a legend.
std::string line_chart(const std::string& title, const std::string& x_label,
                       const std::string& y_label,
                       const std::vector<Series>& series);

// One heatmap panel per attention record, side by side, with a shared
// color ramp and node-role tick marks.
std::string attention_heatmaps(const std::string& title,
                               const std::vector<AttentionRecord>& records);

}  // namespace kgicu::svg
