#include "rde/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "rde/errors.hpp"

namespace rde {

namespace {

constexpr double kWidth = 640.0, kHeight = 400.0;
constexpr double kLeft = 62.0, kRight = 616.0, kTop = 42.0, kBottom = 356.0;
constexpr const char* kPalette[] = {"#2266aa", "#aa3322", "#22855a", "#8155aa",
                                    "#b07d1f", "#3b3b3b"};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    if (c == '&')
      out += "&amp;";
    else if (c == '<')
      out += "&lt;";
    else if (c == '>')
      out += "&gt;";
    else
      out += c;
  }
  return out;
}

struct Axes {
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;

  void include(double x, double y) {
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  }

  void seed(double x, double y) { x0 = x1 = x; y0 = y1 = y; }

  void pad() {
    if (x1 == x0) {
      x0 -= 1.0;
      x1 += 1.0;
    }
    if (y1 == y0) {
      y0 -= 1.0;
      y1 += 1.0;
    } else {
      const double m = 0.05 * (y1 - y0);
      y0 -= m;
      y1 += m;
    }
  }

  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kRight - kLeft); }
  double py(double y) const { return kBottom - (y - y0) / (y1 - y0) * (kBottom - kTop); }
};

void open_svg(std::ostringstream& o, const std::string& title) {
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
    << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n"
    << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n"
    << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
       "font-family=\"sans-serif\" font-size=\"15\">"
    << escape(title) << "</text>\n";
}

void draw_axes(std::ostringstream& o, const Axes& a, const std::string& x_label,
               const std::string& y_label) {
  o << "<line x1=\"" << kLeft << "\" y1=\"" << kBottom << "\" x2=\"" << kRight
    << "\" y2=\"" << kBottom << "\" stroke=\"black\"/>\n"
    << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
    << kBottom << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double fx = a.x0 + (a.x1 - a.x0) * i / 5.0;
    const double fy = a.y0 + (a.y1 - a.y0) * i / 5.0;
    o << "<line x1=\"" << a.px(fx) << "\" y1=\"" << kBottom << "\" x2=\"" << a.px(fx)
      << "\" y2=\"" << kBottom + 5 << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << a.px(fx) << "\" y=\"" << kBottom + 19
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
      << fmt(fx) << "</text>\n"
      << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << a.py(fy) << "\" x2=\"" << kLeft
      << "\" y2=\"" << a.py(fy) << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << kLeft - 8 << "\" y=\"" << a.py(fy) + 4
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(fy)
      << "</text>\n";
  }
  o << "<text x=\"" << (kLeft + kRight) / 2 << "\" y=\"" << kHeight - 8
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
    << escape(x_label) << "</text>\n"
    << "<text x=\"16\" y=\"" << (kTop + kBottom) / 2
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
       "transform=\"rotate(-90 16 "
    << (kTop + kBottom) / 2 << ")\">" << escape(y_label) << "</text>\n";
}

}  // namespace

Histogram make_histogram(std::span<const double> values, int bins) {
  if (values.empty()) throw InsufficientData("histogram of an empty sample");
  if (bins < 1) throw ConfigError("bins", "need at least one bin");
  double lo = values[0], hi = values[0];
  for (const double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi == lo) hi = lo + 1.0;
  Histogram h;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  for (int i = 0; i <= bins; ++i)
    h.edges.push_back(lo + (hi - lo) * static_cast<double>(i) / bins);
  for (const double v : values) {
    auto b = static_cast<std::int64_t>((v - lo) / (hi - lo) * bins);
    b = std::clamp<std::int64_t>(b, 0, bins - 1);
    ++h.counts[static_cast<std::size_t>(b)];
  }
  return h;
}

std::string svg_line_chart(std::span<const PlotSeries> series, const std::string& title,
                           const std::string& x_label, const std::string& y_label) {
  Axes a;
  bool seeded = false;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      if (!seeded) {
        a.seed(x, y);
        seeded = true;
      } else {
        a.include(x, y);
      }
    }
  if (!seeded) a.seed(0.0, 0.0);
  a.pad();

  std::ostringstream o;
  open_svg(o, title);
  draw_axes(o, a, x_label, y_label);
  std::size_t ci = 0;
  for (const auto& s : series) {
    const char* color = kPalette[ci++ % (sizeof(kPalette) / sizeof(kPalette[0]))];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.3\" points=\"";
    for (const auto& [x, y] : s.points) o << a.px(x) << "," << a.py(y) << " ";
    o << "\"/>\n";
    if (!s.name.empty())
      o << "<text x=\"" << kRight - 4 << "\" y=\"" << kTop + 14 * static_cast<double>(ci)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\""
        << color << "\">" << escape(s.name) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::string svg_histogram_chart(const Histogram& hist, const std::string& title,
                                const std::string& x_label) {
  if (hist.edges.size() != hist.counts.size() + 1 || hist.counts.empty())
    throw ConfigError("histogram", "edges must be one longer than counts");
  Axes a;
  a.seed(hist.edges.front(), 0.0);
  std::int64_t peak = 1;
  for (const auto c : hist.counts) peak = std::max(peak, c);
  a.include(hist.edges.back(), static_cast<double>(peak));
  a.pad();
  a.y0 = 0.0;

  std::ostringstream o;
  open_svg(o, title);
  draw_axes(o, a, x_label, "count");
  for (std::size_t i = 0; i < hist.counts.size(); ++i) {
    const double x = a.px(hist.edges[i]);
    const double w = a.px(hist.edges[i + 1]) - x;
    const double y = a.py(static_cast<double>(hist.counts[i]));
    o << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << std::max(w - 1.0, 0.5)
      << "\" height=\"" << kBottom - y << "\" fill=\"#4477aa\" stroke=\"white\"/>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::string svg_error_curve(std::span<const double> x, std::span<const double> y,
                            std::span<const double> lo, std::span<const double> hi,
                            const std::string& title, const std::string& x_label,
                            const std::string& y_label) {
  if (x.size() != y.size() || x.size() != lo.size() || x.size() != hi.size() || x.empty())
    throw ConfigError("series", "error curve needs equal-length nonempty columns");
  Axes a;
  a.seed(x[0], lo[0]);
  for (std::size_t i = 0; i < x.size(); ++i) {
    a.include(x[i], lo[i]);
    a.include(x[i], hi[i]);
    a.include(x[i], y[i]);
  }
  a.pad();

  std::ostringstream o;
  open_svg(o, title);
  draw_axes(o, a, x_label, y_label);
  o << "<polyline fill=\"none\" stroke=\"#2266aa\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < x.size(); ++i) o << a.px(x[i]) << "," << a.py(y[i]) << " ";
  o << "\"/>\n";
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double cx = a.px(x[i]);
    o << "<line x1=\"" << cx << "\" y1=\"" << a.py(lo[i]) << "\" x2=\"" << cx << "\" y2=\""
      << a.py(hi[i]) << "\" stroke=\"#aa3322\" stroke-width=\"1\"/>\n"
      << "<circle cx=\"" << cx << "\" cy=\"" << a.py(y[i]) << "\" r=\"2.5\" fill=\"#2266aa\"/>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace rde
