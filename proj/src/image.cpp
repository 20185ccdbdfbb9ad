#include "uwpde/image.hpp"

#include "uwpde/error.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace uwpde {

ImageBuffer::ImageBuffer(int width, int height, int channels, double fill)
    : width_(width), height_(height), channels_(channels) {
    if (width < 1 || height < 1) {
        throw Error(ErrorCode::InvalidBufferState,
                    "dimensions must be positive, got " + std::to_string(width) + "x" +
                        std::to_string(height));
    }
    if (channels != 1 && channels != 3) {
        throw Error(ErrorCode::InvalidBufferState,
                    "channel count must be 1 or 3, got " + std::to_string(channels));
    }
    data_.assign(plane_size() * static_cast<std::size_t>(channels), fill);
}

double ImageBuffer::at(int x, int y, int c) const {
    if (!in_bounds(x, y, c)) {
        throw std::out_of_range("ImageBuffer::at(" + std::to_string(x) + "," + std::to_string(y) +
                                "," + std::to_string(c) + ") outside " + std::to_string(width_) +
                                "x" + std::to_string(height_) + "x" + std::to_string(channels_));
    }
    return data_[index(x, y, c)];
}

double& ImageBuffer::at(int x, int y, int c) {
    if (!in_bounds(x, y, c)) {
        throw std::out_of_range("ImageBuffer::at(" + std::to_string(x) + "," + std::to_string(y) +
                                "," + std::to_string(c) + ") outside " + std::to_string(width_) +
                                "x" + std::to_string(height_) + "x" + std::to_string(channels_));
    }
    return data_[index(x, y, c)];
}

std::span<const double> ImageBuffer::plane(int c) const {
    if (c < 0 || c >= channels_) {
        throw Error(ErrorCode::ChannelOutOfRange, "channel " + std::to_string(c));
    }
    return std::span<const double>(data_).subspan(static_cast<std::size_t>(c) * plane_size(),
                                                  plane_size());
}

std::span<double> ImageBuffer::plane(int c) {
    if (c < 0 || c >= channels_) {
        throw Error(ErrorCode::ChannelOutOfRange, "channel " + std::to_string(c));
    }
    return std::span<double>(data_).subspan(static_cast<std::size_t>(c) * plane_size(),
                                            plane_size());
}

bool ImageBuffer::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void require_finite(const ImageBuffer& buf, const char* context) {
    if (!buf.all_finite()) {
        throw Error(ErrorCode::InvalidBufferState, std::string(context) + ": non-finite value");
    }
}

void require_colour(const ImageBuffer& buf, const char* context) {
    if (buf.channels() != 3) {
        throw Error(ErrorCode::NotColourImage,
                    std::string(context) + " requires 3 channels, got " +
                        std::to_string(buf.channels()));
    }
}

ImageBuffer clamp01(const ImageBuffer& buf) {
    require_finite(buf, "clamp01");
    ImageBuffer out = buf;
    for (double& v : out.values()) {
        v = std::min(1.0, std::max(0.0, v));
    }
    return out;
}

ImageBuffer luminance(const ImageBuffer& buf) {
    if (buf.channels() == 1) {
        return buf;
    }
    ImageBuffer out(buf.width(), buf.height(), 1);
    auto r = buf.plane(0);
    auto g = buf.plane(1);
    auto b = buf.plane(2);
    auto dst = out.plane(0);
    for (std::size_t i = 0; i < dst.size(); ++i) {
        dst[i] = (r[i] + g[i] + b[i]) / 3.0;
    }
    return out;
}

double max_abs_diff(const ImageBuffer& a, const ImageBuffer& b) {
    if (!a.same_shape(b)) {
        throw Error(ErrorCode::InvalidBufferState, "max_abs_diff: shape mismatch");
    }
    double worst = 0.0;
    auto va = a.values();
    auto vb = b.values();
    for (std::size_t i = 0; i < va.size(); ++i) {
        worst = std::max(worst, std::abs(va[i] - vb[i]));
    }
    return worst;
}

}  // namespace uwpde
