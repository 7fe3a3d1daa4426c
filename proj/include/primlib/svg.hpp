#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "primlib/segmenter.hpp"

namespace primlib {

/// Writes a self-contained SVG showing the fused keypoint density with
/// keypoint markers on top and one windowed-jerk panel per stream below,
/// with the detection threshold drawn as a horizontal rule. Output is
/// deterministic: fixed layout, fixed number formatting, no timestamps;
/// the seed is echoed into the file.
void write_density_svg(const std::filesystem::path& path,
                       const SegmentationResult& result,
                       const std::vector<std::string>& stream_names,
                       double threshold, std::uint64_t seed);

}  // namespace primlib
