// Copyright 2026 The lindmag Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lindmag/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace lindmag::plot {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 80.0, kRight = 170.0, kTop = 40.0, kBottom = 60.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

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

struct Axis {
  double lo = 0.0, hi = 1.0;
  bool log = false;
  double px0 = 0.0, px1 = 1.0;

  double map(double v) const {
    const double a = log ? std::log10(v) : v;
    const double l = log ? std::log10(lo) : lo;
    const double h = log ? std::log10(hi) : hi;
    return px0 + (a - l) / (h - l) * (px1 - px0);
  }
  std::vector<double> ticks() const {
    std::vector<double> t;
    if (log) {
      for (int e = static_cast<int>(std::floor(std::log10(lo)));
           e <= static_cast<int>(std::ceil(std::log10(hi))); ++e) {
        const double v = std::pow(10.0, e);
        if (v >= lo * (1 - 1e-12) && v <= hi * (1 + 1e-12)) t.push_back(v);
      }
      return t;
    }
    const double span = hi - lo;
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
      step = m * mag;
      if (step >= raw) break;
    }
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step) t.push_back(v);
    return t;
  }
};

void fit_range(Axis& ax, double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    lo = ax.log ? 1e-3 : 0.0;
    hi = 1.0;
  }
  if (ax.log) {
    lo = std::max(lo, 1e-300);
    if (hi <= lo) hi = lo * 10.0;
    ax.lo = std::pow(10.0, std::floor(std::log10(lo)));
    ax.hi = std::pow(10.0, std::ceil(std::log10(hi)));
    if (ax.hi <= ax.lo) ax.hi = ax.lo * 10.0;
    return;
  }
  if (hi <= lo) {
    const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
    lo -= pad;
    hi += pad;
  }
  const double pad = 0.05 * (hi - lo);
  ax.lo = lo - pad;
  ax.hi = hi + pad;
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

void frame(std::ostringstream& o, const std::string& title, const std::string& xl,
           const std::string& yl, const Axis& x, const Axis& y, bool x_ticks) {
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
    << escape(title) << "</text>\n"
    << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kWidth - kLeft - kRight
    << "\" height=\"" << kHeight - kTop - kBottom << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : y.ticks()) {
    const double py = y.map(t);
    o << "<line x1=\"" << kLeft - 4 << "\" x2=\"" << kLeft << "\" y1=\"" << py << "\" y2=\"" << py
      << "\" stroke=\"black\"/><text x=\"" << kLeft - 6 << "\" y=\"" << py + 4
      << "\" text-anchor=\"end\">" << fmt(t) << "</text>\n";
  }
  if (x_ticks) {
    for (double t : x.ticks()) {
      const double px = x.map(t);
      o << "<line x1=\"" << px << "\" x2=\"" << px << "\" y1=\"" << kHeight - kBottom << "\" y2=\""
        << kHeight - kBottom + 4 << "\" stroke=\"black\"/><text x=\"" << px << "\" y=\""
        << kHeight - kBottom + 18 << "\" text-anchor=\"middle\">" << fmt(t) << "</text>\n";
    }
  }
  o << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\"" << kHeight - 15
    << "\" text-anchor=\"middle\">" << escape(xl) << "</text>\n"
    << "<text transform=\"translate(18," << (kTop + kHeight - kBottom) / 2
    << ") rotate(-90)\" text-anchor=\"middle\">" << escape(yl) << "</text>\n";
}

}  // namespace

std::string render_svg(const LineChart& chart) {
  Axis x{0, 1, chart.log_x, kLeft, kWidth - kRight};
  Axis y{0, 1, chart.log_y, kHeight - kBottom, kTop};
  double xl = std::numeric_limits<double>::infinity(), xh = -xl, yl = xl, yh = -xl;
  for (const auto& s : chart.series) {
    for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
      if (chart.log_x && !(s.x[k] > 0.0)) continue;
      const double e = k < s.err.size() ? s.err[k] : 0.0;
      xl = std::min(xl, s.x[k]);
      xh = std::max(xh, s.x[k]);
      const double lo = s.y[k] - e, hi = s.y[k] + e;
      if (!chart.log_y || lo > 0.0) yl = std::min(yl, lo);
      if (!chart.log_y || s.y[k] > 0.0) yl = std::min(yl, s.y[k]);
      yh = std::max(yh, hi);
    }
  }
  fit_range(x, xl, xh);
  fit_range(y, yl, yh);
  std::ostringstream o;
  frame(o, chart.title, chart.x_label, chart.y_label, x, y, true);
  for (std::size_t si = 0; si < chart.series.size(); ++si) {
    const auto& s = chart.series[si];
    const char* color = kPalette[si % std::size(kPalette)];
    auto usable = [&](std::size_t k, double v) {
      return std::isfinite(v) && (!chart.log_y || v > 0.0) && (!chart.log_x || s.x[k] > 0.0);
    };
    if (!s.err.empty()) {
      std::ostringstream band;
      std::vector<std::size_t> idx;
      for (std::size_t k = 0; k < s.x.size() && k < s.y.size() && k < s.err.size(); ++k) {
        if (usable(k, s.y[k] - s.err[k]) && usable(k, s.y[k] + s.err[k])) idx.push_back(k);
      }
      if (idx.size() > 1) {
        for (std::size_t k : idx) band << x.map(s.x[k]) << "," << y.map(s.y[k] + s.err[k]) << " ";
        for (auto it = idx.rbegin(); it != idx.rend(); ++it) {
          band << x.map(s.x[*it]) << "," << y.map(s.y[*it] - s.err[*it]) << " ";
        }
        o << "<polygon points=\"" << band.str() << "\" fill=\"" << color
          << "\" fill-opacity=\"0.18\" stroke=\"none\"/>\n";
      }
    }
    std::ostringstream pts;
    std::size_t count = 0;
    for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
      if (!usable(k, s.y[k])) continue;
      pts << x.map(s.x[k]) << "," << y.map(s.y[k]) << " ";
      ++count;
    }
    o << "<polyline points=\"" << pts.str() << "\" fill=\"none\" stroke=\"" << color
      << "\" stroke-width=\"1.6\"" << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n";
    if (count <= 12) {
      for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
        if (!usable(k, s.y[k])) continue;
        o << "<circle cx=\"" << x.map(s.x[k]) << "\" cy=\"" << y.map(s.y[k]) << "\" r=\"3\" fill=\""
          << color << "\"/>\n";
      }
    }
    const double ly = kTop + 14.0 + 18.0 * static_cast<double>(si);
    o << "<line x1=\"" << kWidth - kRight + 10 << "\" x2=\"" << kWidth - kRight + 34 << "\" y1=\""
      << ly << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\""
      << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << "/><text x=\"" << kWidth - kRight + 40
      << "\" y=\"" << ly + 4 << "\">" << escape(s.name) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::string render_svg(const BarChart& chart) {
  const std::size_t n = chart.bars.size();
  Axis x{0, static_cast<double>(std::max<std::size_t>(n, 1)), false, kLeft, kWidth - kRight};
  Axis y{0, 1, chart.log_y, kHeight - kBottom, kTop};
  double yl = chart.log_y ? std::numeric_limits<double>::infinity() : 0.0, yh = 0.0;
  for (const auto& b : chart.bars) {
    if (chart.log_y && b.value > 0.0) yl = std::min(yl, std::max(b.value - b.err, b.value * 0.5));
    yh = std::max(yh, b.value + b.err);
  }
  fit_range(y, yl, yh);
  if (!chart.log_y) y.lo = std::min(0.0, y.lo);
  std::ostringstream o;
  frame(o, chart.title, "", chart.y_label, x, y, false);
  const double base = chart.log_y ? y.map(y.lo) : y.map(0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& b = chart.bars[k];
    const double x0 = x.map(static_cast<double>(k) + 0.15), x1 = x.map(static_cast<double>(k) + 0.85);
    const double cx = 0.5 * (x0 + x1);
    if (!chart.log_y || b.value > 0.0) {
      const double top = y.map(b.value);
      o << "<rect x=\"" << x0 << "\" y=\"" << std::min(top, base) << "\" width=\"" << x1 - x0
        << "\" height=\"" << std::abs(base - top) << "\" fill=\"" << kPalette[k % std::size(kPalette)]
        << "\"/>\n";
      if (b.err > 0.0) {
        const double lo = chart.log_y ? std::max(b.value - b.err, y.lo) : b.value - b.err;
        o << "<line x1=\"" << cx << "\" x2=\"" << cx << "\" y1=\"" << y.map(lo) << "\" y2=\""
          << y.map(b.value + b.err) << "\" stroke=\"black\"/>\n";
      }
    }
    o << "<text x=\"" << cx << "\" y=\"" << kHeight - kBottom + 16
      << "\" text-anchor=\"middle\" font-size=\"10\">" << escape(b.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

void write_svg(const std::string& path, const std::string& svg) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << svg;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace lindmag::plot
