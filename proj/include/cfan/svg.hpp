#pragma once
// Minimal static SVG rendering for study outputs: ROC curves and accuracy bar
// charts. Output is a deterministic function of the inputs (fixed canvas,
// fixed palette, fixed number formatting) so repeated runs are byte-identical.

#include <cstdio>
#include <string>
#include <vector>

#include "cfan/util.hpp"

namespace cfan::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

namespace detail {

inline const char* palette(size_t i) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                 "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  return colors[i % std::size(colors)];
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
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

struct Canvas {
  static constexpr double width = 640.0, height = 480.0;
  static constexpr double left = 70.0, right = 610.0, top = 50.0, bottom = 420.0;
  double x0, x1, y0, y1;  // data ranges

  double px(double x) const { return left + (x - x0) / (x1 - x0) * (right - left); }
  double py(double y) const { return bottom - (y - y0) / (y1 - y0) * (bottom - top); }

  std::string frame(const std::string& title, const std::string& xlabel,
                    const std::string& ylabel) const {
    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
         "viewBox=\"0 0 640 480\" font-family=\"sans-serif\">\n";
    s += "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
    s += "<text x=\"320\" y=\"28\" text-anchor=\"middle\" font-size=\"16\">" +
         escape(title) + "</text>\n";
    s += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" +
         num(right - left) + "\" height=\"" + num(bottom - top) +
         "\" fill=\"none\" stroke=\"#333333\"/>\n";
    s += "<text x=\"" + num((left + right) / 2) + "\" y=\"460\" text-anchor=\"middle\" "
         "font-size=\"13\">" + escape(xlabel) + "</text>\n";
    s += "<text x=\"22\" y=\"" + num((top + bottom) / 2) +
         "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 22 " +
         num((top + bottom) / 2) + ")\">" + escape(ylabel) + "</text>\n";
    return s;
  }

  std::string ticks_x(const std::vector<double>& at) const {
    std::string s;
    for (double v : at) {
      s += "<line x1=\"" + num(px(v)) + "\" y1=\"" + num(bottom) + "\" x2=\"" +
           num(px(v)) + "\" y2=\"" + num(bottom + 5) + "\" stroke=\"#333333\"/>\n";
      s += "<text x=\"" + num(px(v)) + "\" y=\"" + num(bottom + 20) +
           "\" text-anchor=\"middle\" font-size=\"11\">" + num(v) + "</text>\n";
    }
    return s;
  }

  std::string ticks_y(const std::vector<double>& at) const {
    std::string s;
    for (double v : at) {
      s += "<line x1=\"" + num(left - 5) + "\" y1=\"" + num(py(v)) + "\" x2=\"" +
           num(left) + "\" y2=\"" + num(py(v)) + "\" stroke=\"#333333\"/>\n";
      s += "<text x=\"" + num(left - 9) + "\" y=\"" + num(py(v) + 4) +
           "\" text-anchor=\"end\" font-size=\"11\">" + num(v) + "</text>\n";
    }
    return s;
  }

  std::string polyline(const Series& series, const char* color) const {
    std::string s = "<polyline fill=\"none\" stroke=\"";
    s += color;
    s += "\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < series.x.size(); ++i) {
      if (i) s += ' ';
      s += num(px(series.x[i])) + "," + num(py(series.y[i]));
    }
    s += "\"/>\n";
    return s;
  }

  std::string legend(const std::vector<Series>& series) const {
    std::string s;
    double y = top + 16.0;
    for (size_t i = 0; i < series.size(); ++i) {
      const double x = right - 170.0;
      s += "<line x1=\"" + num(x) + "\" y1=\"" + num(y - 4) + "\" x2=\"" + num(x + 22) +
           "\" y2=\"" + num(y - 4) + "\" stroke=\"" + detail::palette(i) +
           "\" stroke-width=\"2\"/>\n";
      s += "<text x=\"" + num(x + 28) + "\" y=\"" + num(y) + "\" font-size=\"11\">" +
           escape(series[i].label) + "</text>\n";
      y += 16.0;
    }
    return s;
  }
};

}  // namespace detail

// ROC curves on the unit square with a chance diagonal and a legend.
inline std::string roc_chart(const std::string& title, const std::vector<Series>& curves) {
  require(!curves.empty(), "roc_chart: no curves");
  detail::Canvas c{0.0, 1.0, 0.0, 1.0};
  std::string s = c.frame(title, "false positive rate", "true positive rate");
  s += c.ticks_x({0.0, 0.25, 0.5, 0.75, 1.0});
  s += c.ticks_y({0.0, 0.25, 0.5, 0.75, 1.0});
  s += "<line x1=\"" + detail::num(c.px(0)) + "\" y1=\"" + detail::num(c.py(0)) +
       "\" x2=\"" + detail::num(c.px(1)) + "\" y2=\"" + detail::num(c.py(1)) +
       "\" stroke=\"#bbbbbb\" stroke-dasharray=\"5,4\"/>\n";
  for (size_t i = 0; i < curves.size(); ++i) s += c.polyline(curves[i], detail::palette(i));
  s += c.legend(curves);
  s += "</svg>\n";
  return s;
}

// Grouped bars (one per label) with +/- one standard deviation whiskers.
inline std::string bar_chart(const std::string& title, const std::string& ylabel,
                             const std::vector<std::string>& labels,
                             const std::vector<double>& means,
                             const std::vector<double>& stds) {
  require(!labels.empty() && labels.size() == means.size() && means.size() == stds.size(),
          "bar_chart: size mismatch");
  double hi = 0.0;
  for (size_t i = 0; i < means.size(); ++i) hi = std::max(hi, means[i] + stds[i]);
  hi = std::max(1e-9, hi * 1.1);
  detail::Canvas c{0.0, double(labels.size()), 0.0, hi};
  std::string s = c.frame(title, "", ylabel);
  s += c.ticks_y({0.0, hi * 0.25, hi * 0.5, hi * 0.75, hi});
  for (size_t i = 0; i < labels.size(); ++i) {
    const double xm = double(i) + 0.5;
    const double x_left = c.px(double(i) + 0.18), x_right = c.px(double(i) + 0.82);
    s += "<rect x=\"" + detail::num(x_left) + "\" y=\"" + detail::num(c.py(means[i])) +
         "\" width=\"" + detail::num(x_right - x_left) + "\" height=\"" +
         detail::num(c.py(0.0) - c.py(means[i])) + "\" fill=\"" + detail::palette(i) +
         "\" fill-opacity=\"0.75\"/>\n";
    if (stds[i] > 0.0) {
      const double lo_y = c.py(std::max(0.0, means[i] - stds[i]));
      const double hi_y = c.py(means[i] + stds[i]);
      s += "<line x1=\"" + detail::num(c.px(xm)) + "\" y1=\"" + detail::num(lo_y) +
           "\" x2=\"" + detail::num(c.px(xm)) + "\" y2=\"" + detail::num(hi_y) +
           "\" stroke=\"#333333\"/>\n";
      for (double wy : {lo_y, hi_y})
        s += "<line x1=\"" + detail::num(c.px(xm) - 6) + "\" y1=\"" + detail::num(wy) +
             "\" x2=\"" + detail::num(c.px(xm) + 6) + "\" y2=\"" + detail::num(wy) +
             "\" stroke=\"#333333\"/>\n";
    }
    s += "<text x=\"" + detail::num(c.px(xm)) + "\" y=\"" + detail::num(c.py(0.0) + 20) +
         "\" text-anchor=\"middle\" font-size=\"12\">" + detail::escape(labels[i]) +
         "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace cfan::svg
