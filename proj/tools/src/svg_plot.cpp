#include "soltool/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace soltool {
namespace {

constexpr double kWidth = 900, kHeight = 540;
constexpr double kLeft = 72, kRight = 30, kTop = 48, kBottom = 56;
constexpr size_t kMaxPointsPerSeries = 2000;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void take(double v) {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  void pad() {
    if (!(lo <= hi)) {  // nothing finite landed
      lo = 0.0;
      hi = 1.0;
    }
    if (lo == hi) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
};

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

/// Round tick spacing to 1/2/5 x 10^k covering the range with ~6 ticks.
std::vector<double> ticks(const Range& r) {
  const double span = r.hi - r.lo;
  double step = std::pow(10.0, std::floor(std::log10(span / 6.0)));
  for (double mult : {1.0, 2.0, 5.0, 10.0}) {
    if (span / (step * mult) <= 6.5) {
      step *= mult;
      break;
    }
  }
  std::vector<double> out;
  const double first = std::ceil(r.lo / step) * step;
  for (double v = first; v <= r.hi + 1e-9 * span; v += step) {
    out.push_back(std::abs(v) < 1e-12 * span ? 0.0 : v);
  }
  return out;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void write_svg_plot(const std::filesystem::path& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<Series>& series) {
  Range rx, ry;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) {
      throw std::invalid_argument("svg plot: series '" + s.label + "' has mismatched x/y sizes");
    }
    for (double v : s.x) rx.take(v);
    for (double v : s.y) ry.take(v);
  }
  rx.pad();
  ry.pad();

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double v) { return kLeft + (v - rx.lo) / (rx.hi - rx.lo) * plot_w; };
  auto py = [&](double v) { return kTop + (ry.hi - v) / (ry.hi - ry.lo) * plot_h; };

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write plot file: " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << kWidth << " " << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"13\">\n";
  out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"26\" text-anchor=\"middle\" font-size=\"17\">"
      << escape(title) << "</text>\n";

  for (double t : ticks(rx)) {
    const double x = px(t);
    out << "<line x1=\"" << x << "\" y1=\"" << kTop << "\" x2=\"" << x << "\" y2=\""
        << kTop + plot_h << "\" stroke=\"#e0e0e0\"/>\n";
    out << "<text x=\"" << x << "\" y=\"" << kTop + plot_h + 18
        << "\" text-anchor=\"middle\">" << num(t) << "</text>\n";
  }
  for (double t : ticks(ry)) {
    const double y = py(t);
    out << "<line x1=\"" << kLeft << "\" y1=\"" << y << "\" x2=\"" << kLeft + plot_w
        << "\" y2=\"" << y << "\" stroke=\"#e0e0e0\"/>\n";
    out << "<text x=\"" << kLeft - 8 << "\" y=\"" << y + 4
        << "\" text-anchor=\"end\">" << num(t) << "</text>\n";
  }
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w << "\" height=\""
      << plot_h << "\" fill=\"none\" stroke=\"#444\"/>\n";
  out << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 14
      << "\" text-anchor=\"middle\">" << escape(x_label) << "</text>\n";
  out << "<text x=\"20\" y=\"" << kTop + plot_h / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 " << kTop + plot_h / 2 << ")\">"
      << escape(y_label) << "</text>\n";

  for (size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    if (s.x.empty()) continue;
    const size_t stride = std::max<size_t>(1, s.x.size() / kMaxPointsPerSeries);
    out << "<polyline fill=\"none\" stroke=\"" << kPalette[i % std::size(kPalette)]
        << "\" stroke-width=\"1.3\" points=\"";
    for (size_t k = 0; k < s.x.size(); k += stride) {
      if (std::isfinite(s.x[k]) && std::isfinite(s.y[k])) {
        out << num(px(s.x[k])) << "," << num(py(s.y[k])) << " ";
      }
    }
    const size_t last = s.x.size() - 1;
    if (last % stride != 0 && std::isfinite(s.x[last]) && std::isfinite(s.y[last])) {
      out << num(px(s.x[last])) << "," << num(py(s.y[last]));
    }
    out << "\"/>\n";
  }

  double ly = kTop + 10;
  for (size_t i = 0; i < series.size(); ++i) {
    const double lx = kLeft + plot_w - 150;
    out << "<line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 24 << "\" y2=\"" << ly
        << "\" stroke=\"" << kPalette[i % std::size(kPalette)] << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << lx + 30 << "\" y=\"" << ly + 4 << "\">" << escape(series[i].label)
        << "</text>\n";
    ly += 18;
  }
  out << "</svg>\n";
}

}  // namespace soltool
