#pragma once

#include "uwpde/image.hpp"

#include <string>
#include <vector>

namespace uwpde {

struct CorpusImage {
    std::string name;
    ImageBuffer image;
};

inline constexpr int kCorpusSize = 24;
inline constexpr int kCorpusExtent = 128;

/// Deterministic synthetic underwater scenes: random shapes and textures
/// under per-channel attenuation, haze, and exposure loss. Several entries
/// carry strong blue/green casts with misaligned channel histograms.
std::vector<CorpusImage> synthetic_corpus(int extent = kCorpusExtent);

/// Gray texture t in [0.05, 0.65] with R = G = t and B = clamp(t + k).
ImageBuffer synthetic_cast_image(double k, int width = 96, int height = 96, unsigned seed = 7);

}  // namespace uwpde
