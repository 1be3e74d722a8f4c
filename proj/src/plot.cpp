#include "wgdet/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace wgdet {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 170.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

constexpr const char* kPalette[] = {"#1f1f1f", "#1f5fbf", "#c0392b", "#2e8b57", "#8e44ad", "#d68910", "#16a085"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

struct Axis {
  bool log = false;
  double lo = 0.0;
  double hi = 1.0;

  bool usable(double v) const { return std::isfinite(v) && (!log || v > 0.0); }
  double t(double v) const { return log ? std::log10(v) : v; }
  double fraction(double v) const { return (t(v) - t(lo)) / (t(hi) - t(lo)); }

  void fit(const std::vector<double>& values) {
    double mn = std::numeric_limits<double>::infinity();
    double mx = -mn;
    for (double v : values) {
      if (!usable(v)) continue;
      mn = std::min(mn, v);
      mx = std::max(mx, v);
    }
    if (!std::isfinite(mn)) {
      mn = log ? 1.0 : 0.0;
      mx = log ? 10.0 : 1.0;
    }
    if (log) {
      lo = std::pow(10.0, std::floor(std::log10(mn)));
      hi = std::pow(10.0, std::ceil(std::log10(mx)));
      if (hi <= lo) hi = lo * 10.0;
    } else {
      const double pad = mx > mn ? 0.05 * (mx - mn) : (mn == 0.0 ? 1.0 : 0.05 * std::abs(mn));
      lo = mn - pad;
      hi = mx + pad;
    }
  }

  std::vector<double> ticks() const {
    std::vector<double> out;
    if (log) {
      for (double d = std::log10(lo); d <= std::log10(hi) + 1e-9; d += 1.0) out.push_back(std::pow(10.0, d));
      return out;
    }
    const double raw = (hi - lo) / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
      step = m * mag;
      if (step >= raw) break;
    }
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
    return out;
  }
};

}  // namespace

std::string render_svg(const PlotSpec& spec) {
  Axis ax{spec.log_x};
  Axis ay{spec.log_y};
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& s : spec.series) {
    if (s.x.size() != s.y.size()) throw std::invalid_argument("render_svg: series '" + s.label + "' has mismatched x/y");
    if ((!s.lower.empty() && s.lower.size() != s.x.size()) || (!s.upper.empty() && s.upper.size() != s.x.size())) {
      throw std::invalid_argument("render_svg: band of series '" + s.label + "' has the wrong length");
    }
    xs.insert(xs.end(), s.x.begin(), s.x.end());
    ys.insert(ys.end(), s.y.begin(), s.y.end());
    ys.insert(ys.end(), s.upper.begin(), s.upper.end());
  }
  ax.fit(xs);
  ay.fit(ys);

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto sx = [&](double v) { return kLeft + pw * ax.fraction(v); };
  // Band edges below a log axis are pinned to its floor.
  auto sy = [&](double v) {
    if (ay.log && !(v > ay.lo)) v = ay.lo;
    return kTop + ph * (1.0 - std::clamp(ay.fraction(v), 0.0, 1.0));
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + px(kWidth) + "\" height=\"" + px(kHeight) +
         "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + px(kLeft + pw / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" +
         escape(spec.title) + "</text>\n";

  for (double t : ax.ticks()) {
    const double x = sx(t);
    svg += "<line x1=\"" + px(x) + "\" y1=\"" + px(kTop) + "\" x2=\"" + px(x) + "\" y2=\"" + px(kTop + ph) +
           "\" stroke=\"#e5e5e5\"/>\n";
    svg += "<text x=\"" + px(x) + "\" y=\"" + px(kTop + ph + 18) + "\" text-anchor=\"middle\">" + fmt(t) + "</text>\n";
  }
  for (double t : ay.ticks()) {
    const double y = sy(t);
    svg += "<line x1=\"" + px(kLeft) + "\" y1=\"" + px(y) + "\" x2=\"" + px(kLeft + pw) + "\" y2=\"" + px(y) +
           "\" stroke=\"#e5e5e5\"/>\n";
    svg += "<text x=\"" + px(kLeft - 6) + "\" y=\"" + px(y + 4) + "\" text-anchor=\"end\">" + fmt(t) + "</text>\n";
  }
  svg += "<rect x=\"" + px(kLeft) + "\" y=\"" + px(kTop) + "\" width=\"" + px(pw) + "\" height=\"" + px(ph) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
  svg += "<text x=\"" + px(kLeft + pw / 2) + "\" y=\"" + px(kHeight - 16) + "\" text-anchor=\"middle\">" +
         escape(spec.x_label) + "</text>\n";
  svg += "<text transform=\"translate(20," + px(kTop + ph / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
         escape(spec.y_label) + "</text>\n";

  for (std::size_t k = 0; k < spec.series.size(); ++k) {
    const auto& s = spec.series[k];
    const std::string color = kPalette[k % std::size(kPalette)];
    if (!s.lower.empty() && !s.upper.empty()) {
      std::string fwd;
      std::string back;
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!ax.usable(s.x[i]) || !std::isfinite(s.upper[i]) || !std::isfinite(s.lower[i])) continue;
        fwd += px(sx(s.x[i])) + "," + px(sy(s.upper[i])) + " ";
        back = px(sx(s.x[i])) + "," + px(sy(s.lower[i])) + " " + back;
      }
      if (!fwd.empty()) {
        svg += "<polygon points=\"" + fwd + back + "\" fill=\"" + color + "\" fill-opacity=\"0.18\" stroke=\"none\"/>\n";
      }
    }
    std::string points;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!ax.usable(s.x[i]) || !ay.usable(s.y[i])) continue;
      points += px(sx(s.x[i])) + "," + px(sy(s.y[i])) + " ";
    }
    svg += "<polyline points=\"" + points + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    const double ly = kTop + 14.0 + 18.0 * static_cast<double>(k);
    svg += "<line x1=\"" + px(kLeft + pw + 12) + "\" y1=\"" + px(ly) + "\" x2=\"" + px(kLeft + pw + 36) + "\" y2=\"" +
           px(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + px(kLeft + pw + 42) + "\" y=\"" + px(ly + 4) + "\">" + escape(s.label) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace wgdet
