#pragma once

#include "uwpde/image.hpp"

#include <array>
#include <optional>

namespace uwpde {

using Matrix3 = std::array<std::array<double, 3>, 3>;

/// Linear sRGB primaries, D65 white.
inline constexpr Matrix3 kRgbToXyz{{
    {0.4124564, 0.3575761, 0.1804375},
    {0.2126729, 0.7151522, 0.0721750},
    {0.0193339, 0.1191920, 0.9503041},
}};

/// Exact inverse of kRgbToXyz (computed, not the rounded published table).
const Matrix3& xyz_to_rgb_matrix();

/// XYZ of RGB white (1,1,1): the row sums of kRgbToXyz.
std::array<double, 3> d65_white();

struct ColourOptions {
    /// Decode sRGB transfer curve before the matrix (and re-encode after).
    bool srgb_transfer = false;
};

/// Unclamped: white maps to roughly (0.9505, 1.0, 1.089).
ImageBuffer rgb_to_xyz(const ImageBuffer& buf, ColourOptions opts = {});

/// Clamped to [0,1].
ImageBuffer xyz_to_rgb(const ImageBuffer& buf, ColourOptions opts = {});

/// RGB -> XYZ, each white-normalized plane stretched so its min goes to 0
/// and its max to the reference white, then back to RGB and clamped.
ImageBuffer xyz_cast_removal(const ImageBuffer& buf, ColourOptions opts = {});

struct HomomorphicParams {
    double gamma_low = 0.5;
    double gamma_high = 2.0;
    double sharpness_c = 1.0;
    double cutoff_frac = 0.05;
    double log_floor = 1e-3;
    double fuzzy_slope = 8.0;
    /// Sigmoid center; the channel mean when unset.
    std::optional<double> fuzzy_center;
    bool fuzzy_enabled = true;

    void validate() const;
    friend bool operator==(const HomomorphicParams&, const HomomorphicParams&) = default;
};

/// High-emphasis transfer at normalized radial frequency `radius`
/// (cycles/pixel, so 0.5 is Nyquist along an axis).
double homomorphic_transfer(double radius, const HomomorphicParams& p);

ImageBuffer fuzzy_homomorphic(const ImageBuffer& buf, const HomomorphicParams& p = {});

}  // namespace uwpde
