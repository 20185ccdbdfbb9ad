#pragma once

#include "uwpde/image.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace uwpde {

// ---------------------------------------------------------------------------
// CLAHE
// ---------------------------------------------------------------------------

struct ClaheParams {
    int tiles_x = 8;
    int tiles_y = 8;
    int bins = 256;
    /// Absolute clip = clip_factor * tile_pixels / bins; infinity disables clipping.
    double clip_factor = 3.0;
    /// false: equalize the channel mean and shift all channels by the change.
    bool per_channel = true;

    static constexpr double kNoClip = std::numeric_limits<double>::infinity();

    void validate() const;
    friend bool operator==(const ClaheParams&, const ClaheParams&) = default;
};

ImageBuffer clahe(const ImageBuffer& buf, const ClaheParams& p);

/// Clipped tile histogram turned into a [0,1] lookup table (cdf / tile_pixels).
/// Exposed for testing the redistribution rule.
std::vector<double> clahe_tile_mapping(std::vector<std::uint64_t> counts, double clip_factor);

// ---------------------------------------------------------------------------
// Piecewise-linear maps
// ---------------------------------------------------------------------------

struct PwlPoint {
    double in = 0.0;
    double out = 0.0;
    friend bool operator==(const PwlPoint&, const PwlPoint&) = default;
};

/// Monotone piecewise-linear map on [0,1]; construction validates.
class PwlMap {
public:
    explicit PwlMap(std::vector<PwlPoint> points);

    static PwlMap identity() { return PwlMap({{0.0, 0.0}, {1.0, 1.0}}); }

    double operator()(double v) const noexcept;
    const std::vector<PwlPoint>& points() const noexcept { return points_; }
    bool is_identity() const noexcept;

    friend bool operator==(const PwlMap&, const PwlMap&) = default;

private:
    std::vector<PwlPoint> points_;
};

ImageBuffer pwl_apply(const ImageBuffer& buf, const PwlMap& map);

/// {(0,0), (p_low,0), (p_high,1), (1,1)} from pooled-luminance percentiles;
/// coincident points are merged and a degenerate span yields identity.
PwlMap pwl_from_stats(const ImageBuffer& buf, double p_low_frac = 0.01, double p_high_frac = 0.99);

// ---------------------------------------------------------------------------
// Percentile stretch (HS per channel, CS pooled)
// ---------------------------------------------------------------------------

struct StretchParams {
    double p_low_frac = 0.01;
    double p_high_frac = 0.99;
    bool per_channel = true;

    void validate() const;
    friend bool operator==(const StretchParams&, const StretchParams&) = default;
};

struct StretchResult {
    ImageBuffer image;
    /// One flag per channel; true where hi - lo < 1e-6 and the channel was left alone.
    std::vector<bool> degenerate;
};

inline constexpr double kDegenerateSpan = 1e-6;

StretchResult stretch(const ImageBuffer& buf, const StretchParams& p);

// ---------------------------------------------------------------------------
// Gain-offset correction
// ---------------------------------------------------------------------------

struct GocParams {
    int variant = 2;
    double gamma = 0.8;  // variant 3 only

    void validate() const;
    friend bool operator==(const GocParams&, const GocParams&) = default;
};

struct GocResult {
    ImageBuffer image;
    /// Set when the input was not RGB and only the stretch step ran.
    bool gray_world_skipped = false;
};

/// Shifts each channel by (mean of channel means - channel mean). Unclamped.
ImageBuffer align_channel_means(const ImageBuffer& buf);

GocResult goc(const ImageBuffer& buf, const GocParams& p);

// ---------------------------------------------------------------------------
// Operator specs and cascades
// ---------------------------------------------------------------------------

struct PwlSpec {
    /// Explicit control points; when empty the map is rebuilt from the
    /// image on every application via pwl_from_stats.
    std::vector<PwlPoint> points;
    double p_low_frac = 0.01;
    double p_high_frac = 0.99;
    friend bool operator==(const PwlSpec&, const PwlSpec&) = default;
};

struct StretchSpec {
    StretchParams params;
    friend bool operator==(const StretchSpec&, const StretchSpec&) = default;
};

using OperatorSpec = std::variant<ClaheParams, PwlSpec, StretchSpec, GocParams>;

/// One of clahe, pwl, hs, cs, goc2, goc3.
std::string operator_name(const OperatorSpec& op);
OperatorSpec default_operator(const std::string& name);

ImageBuffer apply_operator(const ImageBuffer& buf, const OperatorSpec& op);

/// Left-to-right composition; an empty list is the identity.
ImageBuffer cascade(const ImageBuffer& buf, const std::vector<OperatorSpec>& stages);

}  // namespace uwpde
