#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace soltool {

/// One named curve; x and y must be the same length.
struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Renders line series into a self-contained static SVG file: framed axes,
/// ticks, a legend, and one polyline per series. Long series are decimated
/// to keep files small; the CSV traces remain the full-precision record.
void write_svg_plot(const std::filesystem::path& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<Series>& series);

}  // namespace soltool
