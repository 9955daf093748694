#include "core/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace spsim {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;
constexpr const char* kColors[] = {"#1f4e79", "#b03a2e", "#1e8449", "#7d3c98"};

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

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
    case '<': out += "&lt;"; break;
    case '>': out += "&gt;"; break;
    case '&': out += "&amp;"; break;
    case '"': out += "&quot;"; break;
    default: out += c;
    }
  }
  return out;
}

// Roughly five ticks on a 1-2-5 grid.
std::vector<double> ticks(double lo, double hi) {
  std::vector<double> out;
  const double span = hi - lo;
  if (!(span > 0.0)) return {lo};
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step) out.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  return out;
}

} // namespace

std::string render_svg(const PlotSpec& spec) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : spec.series)
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  if (!std::isfinite(x0)) x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  if (x1 == x0) x1 = x0 + 1.0;
  if (y1 == y0) y1 = y0 + 1.0;
  y0 = std::min(y0, 0.0);
  y1 += 0.05 * (y1 - y0);

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return kTop + ph - (y - y0) / (y1 - y0) * ph; };

  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" viewBox=\"0 0 640 400\">\n";
  out += "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
  out += "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"black\">\n";
  out += "<text x=\"320\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" + escape(spec.title) + "</text>\n";
  out += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"392\" text-anchor=\"middle\">" + escape(spec.x_label) + "</text>\n";
  out += "<text x=\"16\" y=\"" + num(kTop + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         num(kTop + ph / 2) + ")\">" + escape(spec.y_label) + "</text>\n";
  for (double t : ticks(x0, x1))
    out += "<text x=\"" + num(px(t)) + "\" y=\"" + num(kTop + ph + 16) + "\" text-anchor=\"middle\">" +
           tick_label(t) + "</text>\n";
  for (double t : ticks(y0, y1))
    out += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(py(t) + 4) + "\" text-anchor=\"end\">" + tick_label(t) +
           "</text>\n";
  out += "</g>\n";
  out += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
         "\" fill=\"none\" stroke=\"black\"/>\n";

  for (std::size_t k = 0; k < spec.series.size(); ++k) {
    const auto& s = spec.series[k];
    const char* color = kColors[k % 4];
    const std::size_t n = std::min(s.x.size(), s.y.size());
    if (s.markers) {
      out += "<g fill=\"" + std::string(color) + "\">\n";
      for (std::size_t i = 0; i < n; ++i)
        if (std::isfinite(s.x[i]) && std::isfinite(s.y[i]))
          out += "<circle cx=\"" + num(px(s.x[i])) + "\" cy=\"" + num(py(s.y[i])) + "\" r=\"2.5\"/>\n";
      out += "</g>\n";
    } else {
      out += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.2\" points=\"";
      bool first = true;
      for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        if (!first) out += ' ';
        out += num(px(s.x[i])) + "," + num(py(s.y[i]));
        first = false;
      }
      out += "\"/>\n";
    }
    if (!s.label.empty())
      out += "<text x=\"" + num(kLeft + pw - 8) + "\" y=\"" + num(kTop + 16 + 14.0 * static_cast<double>(k)) +
             "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" + color + "\">" +
             escape(s.label) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

} // namespace spsim
