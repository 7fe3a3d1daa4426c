#include "primlib/svg.hpp"

#include <algorithm>
#include <cstdio>

#include "primlib/io.hpp"

namespace primlib {

namespace {

constexpr double kWidth = 960.0;
constexpr double kPanelHeight = 150.0;
constexpr double kPanelGap = 34.0;
constexpr double kMarginX = 50.0;
constexpr double kMarginY = 30.0;

std::string number(double value) {
  char buffer[48];
  std::snprintf(buffer, sizeof buffer, "%.6g", value);
  return buffer;
}

/// Maps a series onto panel coordinates and renders it as a polyline.
std::string polyline(const Eigen::VectorXd& series, double top, double lo,
                     double hi, const char* stroke) {
  const double span = hi > lo ? hi - lo : 1.0;
  const double plot_width = kWidth - 2.0 * kMarginX;
  const auto count = static_cast<double>(series.size() - 1);
  std::string points;
  for (Eigen::Index i = 0; i < series.size(); ++i) {
    const double x = kMarginX + plot_width * static_cast<double>(i) /
                                    std::max(count, 1.0);
    const double y =
        top + kPanelHeight - kPanelHeight * (series(i) - lo) / span;
    points += number(x) + "," + number(y) + " ";
  }
  if (!points.empty()) points.pop_back();
  return "  <polyline fill=\"none\" stroke=\"" + std::string(stroke) +
         "\" stroke-width=\"1.2\" points=\"" + points + "\"/>\n";
}

std::string text(double x, double y, const std::string& value) {
  return "  <text x=\"" + number(x) + "\" y=\"" + number(y) +
         "\" font-family=\"monospace\" font-size=\"12\">" + value + "</text>\n";
}

}  // namespace

void write_density_svg(const std::filesystem::path& path,
                       const SegmentationResult& result,
                       const std::vector<std::string>& stream_names,
                       double threshold, std::uint64_t seed) {
  const std::size_t panels = 1 + result.stream_jerk.size();
  const double height =
      kMarginY * 2.0 + static_cast<double>(panels) * (kPanelHeight + kPanelGap);
  const double plot_width = kWidth - 2.0 * kMarginX;
  const auto t = static_cast<double>(result.density.values.size());

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + number(kWidth) +
         "\" height=\"" + number(height) + "\" viewBox=\"0 0 " + number(kWidth) +
         " " + number(height) + "\">\n";
  svg += "  <!-- seed " + std::to_string(seed) + " -->\n";
  svg += "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // Panel 0: fused density with keypoint markers.
  double top = kMarginY;
  const double density_max = result.density.values.maxCoeff();
  svg += text(kMarginX, top - 8.0, "fused keypoint density");
  svg += polyline(result.density.values, top, 0.0, density_max, "#1f77b4");
  for (const Eigen::Index keypoint : result.keypoints.indices) {
    const double x = kMarginX + plot_width * static_cast<double>(keypoint) /
                                    std::max(t - 1.0, 1.0);
    svg += "  <line x1=\"" + number(x) + "\" y1=\"" + number(top) + "\" x2=\"" +
           number(x) + "\" y2=\"" + number(top + kPanelHeight) +
           "\" stroke=\"#d62728\" stroke-width=\"1\" stroke-dasharray=\"4 3\"/>\n";
    const double y = top + kPanelHeight -
                     kPanelHeight * result.density.values(keypoint) / density_max;
    svg += "  <circle cx=\"" + number(x) + "\" cy=\"" + number(y) +
           "\" r=\"3.5\" fill=\"#d62728\"/>\n";
    svg += text(x + 4.0, top + 14.0, std::to_string(keypoint));
  }

  // One windowed-jerk panel per stream, threshold rule included.
  for (std::size_t s = 0; s < result.stream_jerk.size(); ++s) {
    top = kMarginY + static_cast<double>(s + 1) * (kPanelHeight + kPanelGap);
    const Eigen::VectorXd& jerk = result.stream_jerk[s];
    const double jerk_max = std::max(jerk.maxCoeff(), threshold * 1.25);
    const std::string name =
        s < stream_names.size() ? stream_names[s] : "stream " + std::to_string(s);
    svg += text(kMarginX, top - 8.0, "windowed jerk: " + name);
    svg += polyline(jerk, top, 0.0, jerk_max, "#2ca02c");
    const double rule_y = top + kPanelHeight - kPanelHeight * threshold / jerk_max;
    svg += "  <line x1=\"" + number(kMarginX) + "\" y1=\"" + number(rule_y) +
           "\" x2=\"" + number(kWidth - kMarginX) + "\" y2=\"" + number(rule_y) +
           "\" stroke=\"#7f7f7f\" stroke-width=\"1\" stroke-dasharray=\"2 3\"/>\n";
    for (const ChangepointSet& changepoints : result.stream_changepoints) {
      if (changepoints.stream_name != name) continue;
      for (const Eigen::Index index : changepoints.indices) {
        const double x = kMarginX + plot_width * static_cast<double>(index) /
                                        std::max(t - 1.0, 1.0);
        const double y =
            top + kPanelHeight - kPanelHeight * jerk(index) / jerk_max;
        svg += "  <circle cx=\"" + number(x) + "\" cy=\"" + number(y) +
               "\" r=\"3\" fill=\"#ff7f0e\"/>\n";
      }
    }
  }
  svg += "</svg>\n";
  atomic_write_file(path, svg);
}

}  // namespace primlib
