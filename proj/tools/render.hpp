#pragma once

#include "uwpde/analysis.hpp"
#include "uwpde/image.hpp"

#include <array>
#include <string>
#include <vector>

namespace uwpde::cli {

inline constexpr int kMontageSeparator = 8;
inline constexpr int kLabelBand = 14;

/// Single row of equally tall panels with a caption band above each.
ImageBuffer render_montage(const std::vector<ImageBuffer>& panels, const std::vector<std::string>& labels);

/// Overlaid R/G/B histogram bars on a dark background.
ImageBuffer render_histogram_plot(const std::array<Histogram, 3>& hists, int height = 160);

}  // namespace uwpde::cli
