#include "uwpde/analysis.hpp"
#include "uwpde/contrast.hpp"
#include "uwpde/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace uwpde {

namespace {

struct AxisWeights {
    std::vector<int> lo;
    std::vector<int> hi;
    std::vector<double> frac;
};

std::vector<int> tile_edges(int length, int tiles) {
    std::vector<int> edges(static_cast<std::size_t>(tiles) + 1);
    for (int i = 0; i <= tiles; ++i) {
        edges[static_cast<std::size_t>(i)] =
            static_cast<int>(static_cast<long long>(i) * length / tiles);
    }
    return edges;
}

// Bilinear weights toward tile centers; positions outside the outermost
// centers clamp to the nearest tile.
AxisWeights axis_weights(int length, const std::vector<int>& edges) {
    const int tiles = static_cast<int>(edges.size()) - 1;
    std::vector<double> centers(static_cast<std::size_t>(tiles));
    for (int i = 0; i < tiles; ++i) {
        centers[static_cast<std::size_t>(i)] =
            0.5 * (edges[static_cast<std::size_t>(i)] + edges[static_cast<std::size_t>(i) + 1] - 1);
    }
    AxisWeights w;
    w.lo.resize(static_cast<std::size_t>(length));
    w.hi.resize(static_cast<std::size_t>(length));
    w.frac.resize(static_cast<std::size_t>(length));
    int seg = 0;
    for (int x = 0; x < length; ++x) {
        const auto ux = static_cast<std::size_t>(x);
        if (x <= centers.front()) {
            w.lo[ux] = w.hi[ux] = 0;
            w.frac[ux] = 0.0;
            continue;
        }
        if (x >= centers.back()) {
            w.lo[ux] = w.hi[ux] = tiles - 1;
            w.frac[ux] = 0.0;
            continue;
        }
        while (x >= centers[static_cast<std::size_t>(seg) + 1]) ++seg;
        w.lo[ux] = seg;
        w.hi[ux] = seg + 1;
        w.frac[ux] = (x - centers[static_cast<std::size_t>(seg)]) /
                     (centers[static_cast<std::size_t>(seg) + 1] - centers[static_cast<std::size_t>(seg)]);
    }
    return w;
}

std::vector<double> clahe_plane(std::span<const double> src, int width, int height,
                                const ClaheParams& p) {
    const auto xe = tile_edges(width, p.tiles_x);
    const auto ye = tile_edges(height, p.tiles_y);
    const auto bins = static_cast<std::size_t>(p.bins);

    std::vector<int> bin_of(src.size());
    for (std::size_t i = 0; i < src.size(); ++i) {
        bin_of[i] = Histogram::bin_index(src[i], p.bins);
    }

    // maps[(ty * tiles_x + tx) * bins + bin]
    std::vector<double> maps(static_cast<std::size_t>(p.tiles_x * p.tiles_y) * bins);
    for (int ty = 0; ty < p.tiles_y; ++ty) {
        for (int tx = 0; tx < p.tiles_x; ++tx) {
            std::vector<std::uint64_t> counts(bins, 0);
            for (int y = ye[static_cast<std::size_t>(ty)]; y < ye[static_cast<std::size_t>(ty) + 1]; ++y) {
                for (int x = xe[static_cast<std::size_t>(tx)]; x < xe[static_cast<std::size_t>(tx) + 1]; ++x) {
                    ++counts[static_cast<std::size_t>(bin_of[static_cast<std::size_t>(y) * width + x])];
                }
            }
            const auto mapping = clahe_tile_mapping(std::move(counts), p.clip_factor);
            std::copy(mapping.begin(), mapping.end(),
                      maps.begin() + static_cast<std::ptrdiff_t>((ty * p.tiles_x + tx) * p.bins));
        }
    }

    const AxisWeights wx = axis_weights(width, xe);
    const AxisWeights wy = axis_weights(height, ye);
    auto lut = [&](int ty, int tx, int bin) {
        return maps[static_cast<std::size_t>(ty * p.tiles_x + tx) * bins + static_cast<std::size_t>(bin)];
    };

    std::vector<double> out(src.size());
    for (int y = 0; y < height; ++y) {
        const auto uy = static_cast<std::size_t>(y);
        const int j0 = wy.lo[uy];
        const int j1 = wy.hi[uy];
        const double b = wy.frac[uy];
        for (int x = 0; x < width; ++x) {
            const auto ux = static_cast<std::size_t>(x);
            const int i0 = wx.lo[ux];
            const int i1 = wx.hi[ux];
            const double a = wx.frac[ux];
            const int bin = bin_of[uy * static_cast<std::size_t>(width) + ux];
            const double m00 = lut(j0, i0, bin);
            const double m10 = lut(j0, i1, bin);
            const double m01 = lut(j1, i0, bin);
            const double m11 = lut(j1, i1, bin);
            const double top = m00 + a * (m10 - m00);
            const double bottom = m01 + a * (m11 - m01);
            out[uy * static_cast<std::size_t>(width) + ux] =
                std::min(1.0, std::max(0.0, top + b * (bottom - top)));
        }
    }
    return out;
}

}  // namespace

void ClaheParams::validate() const {
    if (tiles_x < 1 || tiles_y < 1) {
        throw Error(ErrorCode::InvalidParameter, "clahe tile counts must be >= 1");
    }
    if (bins < 2) {
        throw Error(ErrorCode::InvalidParameter, "clahe needs at least 2 bins");
    }
    if (!(clip_factor >= 1.0)) {
        throw Error(ErrorCode::InvalidParameter, "clahe clip_factor must be >= 1");
    }
}

std::vector<double> clahe_tile_mapping(std::vector<std::uint64_t> counts, double clip_factor) {
    const std::size_t bins = counts.size();
    const std::uint64_t total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
    std::vector<double> mapping(bins, 0.0);
    if (total == 0 || bins == 0) {
        return mapping;
    }
    if (std::isfinite(clip_factor)) {
        const double limit_real = clip_factor * static_cast<double>(total) / static_cast<double>(bins);
        const auto limit = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::floor(limit_real)));
        std::uint64_t excess = 0;
        for (auto& c : counts) {
            if (c > limit) {
                excess += c - limit;
                c = limit;
            }
        }
        const std::uint64_t share = excess / bins;
        const std::uint64_t residual = excess % bins;
        for (std::size_t i = 0; i < bins; ++i) {
            counts[i] += share + (i < residual ? 1 : 0);
        }
    }
    std::uint64_t running = 0;
    for (std::size_t i = 0; i < bins; ++i) {
        running += counts[i];
        mapping[i] = static_cast<double>(running) / static_cast<double>(total);
    }
    return mapping;
}

ImageBuffer clahe(const ImageBuffer& buf, const ClaheParams& p) {
    p.validate();
    require_finite(buf, "clahe");
    if (buf.width() < p.tiles_x || buf.height() < p.tiles_y) {
        throw Error(ErrorCode::ImageTooSmallForTiling,
                    std::to_string(buf.width()) + "x" + std::to_string(buf.height()) +
                        " image cannot hold " + std::to_string(p.tiles_x) + "x" +
                        std::to_string(p.tiles_y) + " tiles");
    }
    ImageBuffer out(buf.width(), buf.height(), buf.channels());
    if (p.per_channel || buf.channels() == 1) {
        for (int c = 0; c < buf.channels(); ++c) {
            const auto mapped = clahe_plane(buf.plane(c), buf.width(), buf.height(), p);
            std::copy(mapped.begin(), mapped.end(), out.plane(c).begin());
        }
        return out;
    }
    const ImageBuffer lum = luminance(buf);
    const auto mapped = clahe_plane(lum.plane(0), buf.width(), buf.height(), p);
    auto src_l = lum.plane(0);
    for (int c = 0; c < buf.channels(); ++c) {
        auto src = buf.plane(c);
        auto dst = out.plane(c);
        for (std::size_t i = 0; i < dst.size(); ++i) {
            dst[i] = std::min(1.0, std::max(0.0, src[i] + (mapped[i] - src_l[i])));
        }
    }
    return out;
}

}  // namespace uwpde
