#include "sheforge/svg.hpp"

#include "sheforge/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace sheforge::svg {

namespace {

const char *const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string &s) {
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

} // namespace

std::string render(const Chart &chart) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto &s : chart.series) {
    if (s.x.size() != s.y.size())
      throw DomainError("series '" + s.label + "' has mismatched x/y lengths");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]))
        continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!std::isfinite(x0)) {
    x0 = y0 = 0.0;
    x1 = y1 = 1.0;
  }
  if (chart.bars)
    y0 = std::min(y0, 0.0);
  if (x1 == x0)
    x1 = x0 + 1.0;
  if (y1 == y0)
    y1 = y0 + 1.0;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;

  const double left = 70, right = 20, top = 40, bottom = 55;
  const double pw = chart.width - left - right;
  const double ph = chart.height - top - bottom;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << chart.width << "\" height=\"" << chart.height
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << chart.width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(chart.title)
    << "</text>\n";
  o << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
    << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = x0 + (x1 - x0) * i / 5.0;
    const double yv = y0 + (y1 - y0) * i / 5.0;
    o << "<text x=\"" << num(px(xv)) << "\" y=\"" << num(top + ph + 18) << "\" text-anchor=\"middle\">" << tick(xv)
      << "</text>\n";
    o << "<text x=\"" << num(left - 6) << "\" y=\"" << num(py(yv) + 4) << "\" text-anchor=\"end\">" << tick(yv)
      << "</text>\n";
    o << "<line x1=\"" << num(left) << "\" x2=\"" << num(left + pw) << "\" y1=\"" << num(py(yv)) << "\" y2=\""
      << num(py(yv)) << "\" stroke=\"#ddd\"/>\n";
  }
  o << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << chart.height - 12 << "\" text-anchor=\"middle\">"
    << escape(chart.x_label) << "</text>\n";
  o << "<text transform=\"translate(16," << num(top + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
    << escape(chart.y_label) << "</text>\n";

  for (std::size_t si = 0; si < chart.series.size(); ++si) {
    const auto &s = chart.series[si];
    const char *color = kColors[si % std::size(kColors)];
    if (chart.bars && si == 0) {
      const double w = std::max(1.0, 0.6 * pw / std::max<std::size_t>(s.x.size(), 1));
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.y[i]))
          continue;
        const double yt = py(std::max(s.y[i], 0.0));
        const double yb = py(std::min(s.y[i], 0.0));
        o << "<rect x=\"" << num(px(s.x[i]) - w / 2) << "\" y=\"" << num(yt) << "\" width=\"" << num(w)
          << "\" height=\"" << num(yb - yt) << "\" fill=\"" << color << "\"/>\n";
      }
    } else {
      o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i)
        if (std::isfinite(s.y[i]))
          o << num(px(s.x[i])) << ',' << num(py(s.y[i])) << ' ';
      o << "\"/>\n";
    }
    o << "<text x=\"" << num(left + pw - 8) << "\" y=\"" << num(top + 16 + 15.0 * static_cast<double>(si))
      << "\" text-anchor=\"end\" fill=\"" << color << "\">" << escape(s.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

} // namespace sheforge::svg
