#include "uwpde/colour.hpp"

#include "uwpde/contrast.hpp"
#include "uwpde/error.hpp"

#include <algorithm>
#include <cmath>

namespace uwpde {

namespace {

Matrix3 invert(const Matrix3& m) {
    const double c00 = m[1][1] * m[2][2] - m[1][2] * m[2][1];
    const double c01 = m[1][2] * m[2][0] - m[1][0] * m[2][2];
    const double c02 = m[1][0] * m[2][1] - m[1][1] * m[2][0];
    const double det = m[0][0] * c00 + m[0][1] * c01 + m[0][2] * c02;
    const double inv = 1.0 / det;
    Matrix3 r{};
    r[0][0] = c00 * inv;
    r[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * inv;
    r[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * inv;
    r[1][0] = c01 * inv;
    r[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * inv;
    r[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * inv;
    r[2][0] = c02 * inv;
    r[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * inv;
    r[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * inv;
    return r;
}

double srgb_decode(double v) {
    return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

double srgb_encode(double v) {
    return v <= 0.0031308 ? 12.92 * v : 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
}

ImageBuffer apply_matrix(const ImageBuffer& buf, const Matrix3& m) {
    ImageBuffer out(buf.width(), buf.height(), 3);
    auto s0 = buf.plane(0);
    auto s1 = buf.plane(1);
    auto s2 = buf.plane(2);
    auto d0 = out.plane(0);
    auto d1 = out.plane(1);
    auto d2 = out.plane(2);
    for (std::size_t i = 0; i < d0.size(); ++i) {
        const double a = s0[i];
        const double b = s1[i];
        const double c = s2[i];
        d0[i] = m[0][0] * a + m[0][1] * b + m[0][2] * c;
        d1[i] = m[1][0] * a + m[1][1] * b + m[1][2] * c;
        d2[i] = m[2][0] * a + m[2][1] * b + m[2][2] * c;
    }
    return out;
}

}  // namespace

const Matrix3& xyz_to_rgb_matrix() {
    static const Matrix3 inverse = invert(kRgbToXyz);
    return inverse;
}

std::array<double, 3> d65_white() {
    std::array<double, 3> w{};
    for (int r = 0; r < 3; ++r) {
        w[static_cast<std::size_t>(r)] = kRgbToXyz[static_cast<std::size_t>(r)][0] * 1.0 +
                                         kRgbToXyz[static_cast<std::size_t>(r)][1] * 1.0 +
                                         kRgbToXyz[static_cast<std::size_t>(r)][2] * 1.0;
    }
    return w;
}

ImageBuffer rgb_to_xyz(const ImageBuffer& buf, ColourOptions opts) {
    require_colour(buf, "rgb_to_xyz");
    require_finite(buf, "rgb_to_xyz");
    if (!opts.srgb_transfer) {
        return apply_matrix(buf, kRgbToXyz);
    }
    ImageBuffer linear = buf;
    for (double& v : linear.values()) v = srgb_decode(std::min(1.0, std::max(0.0, v)));
    return apply_matrix(linear, kRgbToXyz);
}

ImageBuffer xyz_to_rgb(const ImageBuffer& buf, ColourOptions opts) {
    require_colour(buf, "xyz_to_rgb");
    require_finite(buf, "xyz_to_rgb");
    ImageBuffer out = apply_matrix(buf, xyz_to_rgb_matrix());
    for (double& v : out.values()) {
        v = std::min(1.0, std::max(0.0, v));
        if (opts.srgb_transfer) v = srgb_encode(v);
    }
    return out;
}

ImageBuffer xyz_cast_removal(const ImageBuffer& buf, ColourOptions opts) {
    require_colour(buf, "xyz_cast_removal");
    ImageBuffer xyz = rgb_to_xyz(buf, opts);
    const auto white = d65_white();
    bool stretched = false;
    for (int c = 0; c < 3; ++c) {
        auto plane = xyz.plane(c);
        const double wc = white[static_cast<std::size_t>(c)];
        const auto [mn, mx] = std::minmax_element(plane.begin(), plane.end());
        const double lo = *mn / wc;
        const double span = *mx / wc - lo;
        if (span < kDegenerateSpan) continue;
        stretched = true;
        for (double& v : plane) {
            v = (v / wc - lo) / span * wc;
        }
    }
    if (!stretched) {
        return buf;
    }
    return xyz_to_rgb(xyz, opts);
}

}  // namespace uwpde
