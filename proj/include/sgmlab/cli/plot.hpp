#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace sgmlab::cli {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotOptions {
  std::string title;
  std::string x_label = "sigma";
  std::string y_label = "mean |e_t|";
  int width = 640;
  int height = 420;
};

// Line chart with one <polyline> per series, ticked axes and a legend.
std::string render_svg(const std::vector<Series>& series, const PlotOptions& opts = {});

void emit_plot(const std::vector<Series>& series, const std::filesystem::path& path,
               const PlotOptions& opts = {});

}  // namespace sgmlab::cli
