#pragma once

#include <algorithm>
#include <span>
#include <string>
#include <vector>

#include "iaqmob/error.hpp"
#include "iaqmob/text.hpp"

namespace iaqmob::svg {

inline std::string escape(std::string_view s) {
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

inline std::string num(double v) { return text::fixed(v, 2); }

struct Bar {
  std::string label;
  double value = 0.0;
};

/// Vertical bar chart; the y axis starts at zero.
inline std::string bar_chart(const std::string& title, const std::string& y_label,
                             std::span<const Bar> bars) {
  constexpr double w = 640, h = 360, left = 60, right = 20, top = 40, bottom = 50;
  const double plot_w = w - left - right;
  const double plot_h = h - top - bottom;
  double max_v = 0.0;
  for (const auto& b : bars) max_v = std::max(max_v, b.value);
  if (max_v <= 0.0) max_v = 1.0;

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" + num(h) +
       "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s += "<text x=\"" + num(w / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" +
       escape(title) + "</text>\n";
  s += "<line x1=\"" + num(left) + "\" y1=\"" + num(top + plot_h) + "\" x2=\"" + num(left + plot_w) +
       "\" y2=\"" + num(top + plot_h) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + num(left) + "\" y1=\"" + num(top) + "\" x2=\"" + num(left) + "\" y2=\"" +
       num(top + plot_h) + "\" stroke=\"black\"/>\n";
  s += "<text x=\"" + num(left - 8) + "\" y=\"" + num(top) + "\" text-anchor=\"end\">" +
       text::format_double(max_v) + "</text>\n";
  s += "<text x=\"" + num(left - 8) + "\" y=\"" + num(top + plot_h) + "\" text-anchor=\"end\">0</text>\n";
  s += "<text x=\"14\" y=\"" + num(top + plot_h / 2) + "\" transform=\"rotate(-90 14 " +
       num(top + plot_h / 2) + ")\" text-anchor=\"middle\">" + escape(y_label) + "</text>\n";
  if (!bars.empty()) {
    const double slot = plot_w / static_cast<double>(bars.size());
    for (std::size_t i = 0; i < bars.size(); ++i) {
      const double bh = plot_h * std::max(bars[i].value, 0.0) / max_v;
      const double x = left + slot * static_cast<double>(i) + slot * 0.15;
      s += "<rect x=\"" + num(x) + "\" y=\"" + num(top + plot_h - bh) + "\" width=\"" +
           num(slot * 0.7) + "\" height=\"" + num(bh) + "\" fill=\"#4a7ab5\"/>\n";
      s += "<text x=\"" + num(x + slot * 0.35) + "\" y=\"" + num(top + plot_h + 16) +
           "\" text-anchor=\"middle\">" + escape(bars[i].label) + "</text>\n";
    }
  }
  s += "</svg>\n";
  return s;
}

struct Series {
  std::string name;
  std::vector<double> values;
};

/// Two series over a shared x axis, each scaled to its own y range
/// (left axis for `a`, right axis for `b`).
inline std::string dual_line_chart(const std::string& title, std::span<const std::string> x_labels,
                                   const Series& a, const Series& b) {
  if (a.values.size() != x_labels.size() || b.values.size() != x_labels.size()) {
    throw Error("dual_line_chart: series lengths differ");
  }
  constexpr double w = 720, h = 360, left = 60, right = 60, top = 40, bottom = 60;
  const double plot_w = w - left - right;
  const double plot_h = h - top - bottom;
  const std::size_t n = x_labels.size();

  auto x_at = [&](std::size_t i) {
    return n <= 1 ? left + plot_w / 2 : left + plot_w * static_cast<double>(i) / static_cast<double>(n - 1);
  };
  auto polyline = [&](const Series& s, const char* colour, double& lo, double& hi) {
    lo = s.values.empty() ? 0.0 : *std::min_element(s.values.begin(), s.values.end());
    hi = s.values.empty() ? 1.0 : *std::max_element(s.values.begin(), s.values.end());
    if (hi - lo < 1e-12) hi = lo + 1.0;
    std::string pts;
    for (std::size_t i = 0; i < n; ++i) {
      if (i) pts += ' ';
      pts += num(x_at(i)) + "," + num(top + plot_h - plot_h * (s.values[i] - lo) / (hi - lo));
    }
    return "<polyline fill=\"none\" stroke=\"" + std::string(colour) + "\" stroke-width=\"2\" points=\"" +
           pts + "\"/>\n";
  };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" + num(h) +
       "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s += "<text x=\"" + num(w / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" +
       escape(title) + "</text>\n";
  s += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(plot_w) + "\" height=\"" +
       num(plot_h) + "\" fill=\"none\" stroke=\"black\"/>\n";
  double a_lo, a_hi, b_lo, b_hi;
  s += polyline(a, "#4a7ab5", a_lo, a_hi);
  s += polyline(b, "#c0504d", b_lo, b_hi);
  s += "<text x=\"" + num(left - 6) + "\" y=\"" + num(top + 4) + "\" text-anchor=\"end\" fill=\"#4a7ab5\">" +
       text::fixed(a_hi, 1) + "</text>\n";
  s += "<text x=\"" + num(left - 6) + "\" y=\"" + num(top + plot_h) +
       "\" text-anchor=\"end\" fill=\"#4a7ab5\">" + text::fixed(a_lo, 1) + "</text>\n";
  s += "<text x=\"" + num(left + plot_w + 6) + "\" y=\"" + num(top + 4) + "\" fill=\"#c0504d\">" +
       text::fixed(b_hi, 1) + "</text>\n";
  s += "<text x=\"" + num(left + plot_w + 6) + "\" y=\"" + num(top + plot_h) + "\" fill=\"#c0504d\">" +
       text::fixed(b_lo, 1) + "</text>\n";
  const std::size_t stride = std::max<std::size_t>(1, n / 12);
  for (std::size_t i = 0; i < n; i += stride) {
    s += "<text x=\"" + num(x_at(i)) + "\" y=\"" + num(top + plot_h + 16) + "\" text-anchor=\"middle\">" +
         escape(x_labels[i]) + "</text>\n";
  }
  s += "<text x=\"" + num(left) + "\" y=\"" + num(h - 12) + "\" fill=\"#4a7ab5\">" + escape(a.name) +
       "</text>\n";
  s += "<text x=\"" + num(left + plot_w) + "\" y=\"" + num(h - 12) + "\" text-anchor=\"end\" fill=\"#c0504d\">" +
       escape(b.name) + "</text>\n";
  s += "</svg>\n";
  return s;
}

}  // namespace iaqmob::svg
