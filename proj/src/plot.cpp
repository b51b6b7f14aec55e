#include "fuselage/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>

namespace fuselage {

namespace {

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                 "#9467bd", "#8c564b", "#e377c2", "#17becf"};
constexpr double kLeft = 60, kRight = 150, kTop = 36, kBottom = 48;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
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

struct Frame {
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  double pw = 0, ph = 0;

  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * pw; }
  double py(double y) const { return kTop + ph - (y - y0) / (y1 - y0) * ph; }
};

Frame make_frame(const PlotSpec& spec, std::span<const Series> series) {
  Frame f;
  double lo_x = std::numeric_limits<double>::infinity(), hi_x = -lo_x;
  double lo_y = lo_x, hi_y = hi_x;
  for (const auto& s : series) {
    for (auto [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      lo_x = std::min(lo_x, x);
      hi_x = std::max(hi_x, x);
      lo_y = std::min(lo_y, y);
      hi_y = std::max(hi_y, y);
    }
  }
  if (lo_x <= hi_x) {
    f.x0 = lo_x;
    f.x1 = hi_x;
    f.y0 = lo_y;
    f.y1 = hi_y;
  }
  if (f.x1 - f.x0 < 1e-12) f.x1 = f.x0 + 1.0;
  if (f.y1 - f.y0 < 1e-12) f.y1 = f.y0 + 1.0;
  const double pad = 0.05 * (f.y1 - f.y0);
  f.y0 -= pad;
  f.y1 += pad;
  f.pw = std::max(10.0, spec.width - kLeft - kRight);
  f.ph = std::max(10.0, spec.height - kTop - kBottom);
  return f;
}

std::string header(const PlotSpec& spec, const Frame& f) {
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(spec.width) +
                  "\" height=\"" + std::to_string(spec.height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(kLeft + f.pw / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" +
       escape(spec.title) + "</text>\n";
  s += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(f.pw) + "\" height=\"" +
       num(f.ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = f.x0 + (f.x1 - f.x0) * i / 4.0;
    const double yv = f.y0 + (f.y1 - f.y0) * i / 4.0;
    s += "<text x=\"" + num(f.px(xv)) + "\" y=\"" + num(kTop + f.ph + 14) +
         "\" text-anchor=\"middle\">" + num(xv) + "</text>\n";
    s += "<text x=\"" + num(kLeft - 4) + "\" y=\"" + num(f.py(yv) + 4) + "\" text-anchor=\"end\">" +
         num(yv) + "</text>\n";
  }
  s += "<text x=\"" + num(kLeft + f.pw / 2) + "\" y=\"" + num(spec.height - 10.0) +
       "\" text-anchor=\"middle\">" + escape(spec.x_label) + "</text>\n";
  s += "<text transform=\"translate(14," + num(kTop + f.ph / 2) +
       ") rotate(-90)\" text-anchor=\"middle\">" + escape(spec.y_label) + "</text>\n";
  return s;
}

std::string legend(std::span<const Series> series, const Frame& f) {
  std::string s;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double y = kTop + 12 + 16.0 * static_cast<double>(i);
    const double x = kLeft + f.pw + 12;
    s += "<rect x=\"" + num(x) + "\" y=\"" + num(y - 8) + "\" width=\"10\" height=\"10\" fill=\"" +
         kPalette[i % kPalette.size()] + "\"/>\n";
    s += "<text x=\"" + num(x + 14) + "\" y=\"" + num(y) + "\">" + escape(series[i].label) +
         "</text>\n";
  }
  return s;
}

}  // namespace

std::string svg_line_plot(const PlotSpec& spec, std::span<const Series> series) {
  const Frame f = make_frame(spec, series);
  std::string s = header(spec, f);
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* colour = kPalette[i % kPalette.size()];
    std::string pts;
    for (auto [x, y] : series[i].points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      pts += num(f.px(x)) + "," + num(f.py(y)) + " ";
      s += "<circle cx=\"" + num(f.px(x)) + "\" cy=\"" + num(f.py(y)) + "\" r=\"2.5\" fill=\"" +
           colour + "\"/>\n";
    }
    s += "<polyline fill=\"none\" stroke=\"" + std::string(colour) + "\" stroke-width=\"1.5\" points=\"" +
         pts + "\"/>\n";
  }
  return s + legend(series, f) + "</svg>\n";
}

std::string svg_scatter_plot(const PlotSpec& spec, std::span<const Series> series) {
  const Frame f = make_frame(spec, series);
  std::string s = header(spec, f);
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* colour = kPalette[i % kPalette.size()];
    for (auto [x, y] : series[i].points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      s += "<circle cx=\"" + num(f.px(x)) + "\" cy=\"" + num(f.py(y)) + "\" r=\"1.8\" fill=\"" +
           colour + "\" fill-opacity=\"0.6\"/>\n";
    }
  }
  return s + legend(series, f) + "</svg>\n";
}

}  // namespace fuselage
