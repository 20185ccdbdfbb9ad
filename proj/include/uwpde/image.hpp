#pragma once

#include <cassert>
#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace uwpde {

/// Dense real-valued raster with 1 or 3 channels, stored planar.
///
/// Values are nominally in [0,1]. Intermediate fields (curvature, colour
/// term, XYZ planes) reuse the type and may leave that range, but every
/// value must stay finite.
class ImageBuffer {
public:
    ImageBuffer() = default;
    ImageBuffer(int width, int height, int channels, double fill = 0.0);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int channels() const noexcept { return channels_; }
    std::size_t plane_size() const noexcept {
        return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
    }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    /// Bounds-checked accessor; throws std::out_of_range.
    double at(int x, int y, int c) const;
    double& at(int x, int y, int c);

    double operator()(int x, int y, int c) const noexcept {
        assert(in_bounds(x, y, c));
        return data_[index(x, y, c)];
    }
    double& operator()(int x, int y, int c) noexcept {
        assert(in_bounds(x, y, c));
        return data_[index(x, y, c)];
    }

    std::span<const double> plane(int c) const;
    std::span<double> plane(int c);
    std::span<const double> values() const noexcept { return data_; }
    std::span<double> values() noexcept { return data_; }

    bool in_bounds(int x, int y, int c) const noexcept {
        return x >= 0 && x < width_ && y >= 0 && y < height_ && c >= 0 && c < channels_;
    }
    bool same_shape(const ImageBuffer& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
    }
    bool all_finite() const noexcept;

    friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

private:
    std::size_t index(int x, int y, int c) const noexcept {
        return static_cast<std::size_t>(c) * plane_size() +
               static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    std::vector<double> data_;
};

/// Throws InvalidBufferState when any value is NaN or infinite.
void require_finite(const ImageBuffer& buf, const char* context);

/// Throws NotColourImage unless the buffer has three channels.
void require_colour(const ImageBuffer& buf, const char* context);

ImageBuffer clamp01(const ImageBuffer& buf);

/// Per-pixel mean of the channels; a one-channel buffer is returned as is.
ImageBuffer luminance(const ImageBuffer& buf);

double max_abs_diff(const ImageBuffer& a, const ImageBuffer& b);

/// PNG (8/16-bit gray or RGB, no alpha) and PPM/PGM (P2, P3, P5, P6).
ImageBuffer load_image(const std::filesystem::path& path);

/// Format chosen by extension: .png, .ppm, .pgm. Samples are
/// round(v * (2^bit_depth - 1)).
void save_image(const ImageBuffer& buf, const std::filesystem::path& path, int bit_depth = 8);

}  // namespace uwpde
