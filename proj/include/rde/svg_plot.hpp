#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace rde {

struct PlotSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

struct Histogram {
  std::vector<double> edges;          // bins + 1 ascending edges
  std::vector<std::int64_t> counts;   // one per bin
};

Histogram make_histogram(std::span<const double> values, int bins);

// Self-contained SVG documents, fixed 640x400 canvas.
std::string svg_line_chart(std::span<const PlotSeries> series, const std::string& title,
                           const std::string& x_label, const std::string& y_label);
std::string svg_histogram_chart(const Histogram& hist, const std::string& title,
                                const std::string& x_label);
// Curve with vertical error bars (asymmetric bounds).
std::string svg_error_curve(std::span<const double> x, std::span<const double> y,
                            std::span<const double> lo, std::span<const double> hi,
                            const std::string& title, const std::string& x_label,
                            const std::string& y_label);

}  // namespace rde
