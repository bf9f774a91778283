#include "sgmlab/cli/plot.hpp"

#include "sgmlab/errors.hpp"
#include "sgmlab/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace sgmlab::cli {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Range {
  double lo, hi;
};

Range padded(double lo, double hi) {
  if (hi - lo <= 0.0) {
    const double pad = std::max(std::abs(lo) * 0.1, 1e-9);
    return {lo - pad, hi + pad};
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

}  // namespace

std::string render_svg(const std::vector<Series>& series, const PlotOptions& opts) {
  if (series.empty()) throw ConfigError("plot needs at least one series");
  double xlo = INFINITY, xhi = -INFINITY, ylo = INFINITY, yhi = -INFINITY;
  for (const auto& s : series) {
    if (s.x.empty()) throw ConfigError("series '" + s.label + "' is empty");
    if (s.x.size() != s.y.size())
      throw ConfigError("series '" + s.label + "' has mismatched x/y lengths");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]))
        throw ConfigError("series '" + s.label + "' contains a non-finite point");
      xlo = std::min(xlo, s.x[i]);
      xhi = std::max(xhi, s.x[i]);
      ylo = std::min(ylo, s.y[i]);
      yhi = std::max(yhi, s.y[i]);
    }
  }
  const Range xr = padded(xlo, xhi);
  const Range yr = padded(ylo, yhi);

  const double left = 70, right = 150, top = 40, bottom = 55;
  const double pw = opts.width - left - right;
  const double ph = opts.height - top - bottom;
  auto px = [&](double x) { return left + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double y) { return top + ph - (y - yr.lo) / (yr.hi - yr.lo) * ph; };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(opts.width) +
         "\" height=\"" + std::to_string(opts.height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(opts.width) + "\" height=\"" +
         std::to_string(opts.height) + "\" fill=\"white\"/>\n";
  if (!opts.title.empty())
    svg += "<text x=\"" + num(left + pw / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">" +
           escape(opts.title) + "</text>\n";

  // Axes.
  svg += "<g stroke=\"black\" stroke-width=\"1\">\n";
  svg += "<line x1=\"" + num(left) + "\" y1=\"" + num(top + ph) + "\" x2=\"" + num(left + pw) +
         "\" y2=\"" + num(top + ph) + "\"/>\n";
  svg += "<line x1=\"" + num(left) + "\" y1=\"" + num(top) + "\" x2=\"" + num(left) + "\" y2=\"" +
         num(top + ph) + "\"/>\n";
  svg += "</g>\n";

  constexpr int kTicks = 5;
  svg += "<g class=\"ticks\">\n";
  for (int i = 0; i <= kTicks; ++i) {
    const double xv = xr.lo + (xr.hi - xr.lo) * i / kTicks;
    const double yv = yr.lo + (yr.hi - yr.lo) * i / kTicks;
    svg += "<line x1=\"" + num(px(xv)) + "\" y1=\"" + num(top + ph) + "\" x2=\"" + num(px(xv)) +
           "\" y2=\"" + num(top + ph + 5) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + num(px(xv)) + "\" y=\"" + num(top + ph + 18) +
           "\" text-anchor=\"middle\">" + tick_label(xv) + "</text>\n";
    svg += "<line x1=\"" + num(left - 5) + "\" y1=\"" + num(py(yv)) + "\" x2=\"" + num(left) +
           "\" y2=\"" + num(py(yv)) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + num(left - 8) + "\" y=\"" + num(py(yv) + 4) + "\" text-anchor=\"end\">" +
           tick_label(yv) + "</text>\n";
  }
  svg += "</g>\n";
  svg += "<text x=\"" + num(left + pw / 2) + "\" y=\"" + num(opts.height - 12.0) +
         "\" text-anchor=\"middle\">" + escape(opts.x_label) + "</text>\n";
  svg += "<text x=\"16\" y=\"" + num(top + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         num(top + ph / 2) + ")\">" + escape(opts.y_label) + "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    std::string pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (i) pts += ' ';
      pts += num(px(s.x[i])) + "," + num(py(s.y[i]));
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
  }

  svg += "<g class=\"legend\">\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const double y = top + 10 + 18.0 * static_cast<double>(k);
    const char* color = kPalette[k % std::size(kPalette)];
    svg += "<rect x=\"" + num(left + pw + 15) + "\" y=\"" + num(y - 8) +
           "\" width=\"12\" height=\"12\" fill=\"" + color + "\"/>\n";
    svg += "<text x=\"" + num(left + pw + 32) + "\" y=\"" + num(y + 2) + "\">" +
           escape(series[k].label) + "</text>\n";
  }
  svg += "</g>\n</svg>\n";
  return svg;
}

void emit_plot(const std::vector<Series>& series, const std::filesystem::path& path,
               const PlotOptions& opts) {
  io::write_file_atomic(path, render_svg(series, opts));
}

}  // namespace sgmlab::cli
