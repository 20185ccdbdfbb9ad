#include "uwpde/analysis.hpp"
#include "uwpde/contrast.hpp"
#include "uwpde/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace uwpde {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double clamp_unit(double v) { return std::min(1.0, std::max(0.0, v)); }

}  // namespace

// ---------------------------------------------------------------------------
// PWL
// ---------------------------------------------------------------------------

PwlMap::PwlMap(std::vector<PwlPoint> points) : points_(std::move(points)) {
    if (points_.size() < 2) {
        throw Error(ErrorCode::InvalidMap, "a PWL map needs at least two points");
    }
    if (points_.front().in != 0.0 || points_.back().in != 1.0) {
        throw Error(ErrorCode::InvalidMap, "PWL inputs must start at 0 and end at 1");
    }
    for (std::size_t i = 0; i < points_.size(); ++i) {
        const PwlPoint& pt = points_[i];
        if (!std::isfinite(pt.in) || !std::isfinite(pt.out) || pt.out < 0.0 || pt.out > 1.0) {
            throw Error(ErrorCode::InvalidMap, "PWL outputs must be finite and in [0,1]");
        }
        if (i > 0 && !(pt.in > points_[i - 1].in)) {
            throw Error(ErrorCode::InvalidMap, "PWL inputs must be strictly increasing");
        }
        if (i > 0 && pt.out < points_[i - 1].out) {
            throw Error(ErrorCode::InvalidMap, "PWL outputs must be non-decreasing");
        }
    }
}

double PwlMap::operator()(double v) const noexcept {
    v = clamp_unit(v);
    if (v >= points_.back().in) {
        return points_.back().out;
    }
    auto upper = std::upper_bound(points_.begin(), points_.end(), v,
                                  [](double value, const PwlPoint& pt) { return value < pt.in; });
    const PwlPoint& p1 = *upper;
    const PwlPoint& p0 = *(upper - 1);
    const double t = (v - p0.in) / (p1.in - p0.in);
    // Clamping to the segment keeps the map monotone under rounding.
    return std::min(p1.out, std::max(p0.out, p0.out + t * (p1.out - p0.out)));
}

bool PwlMap::is_identity() const noexcept {
    return std::all_of(points_.begin(), points_.end(),
                       [](const PwlPoint& pt) { return pt.in == pt.out; });
}

ImageBuffer pwl_apply(const ImageBuffer& buf, const PwlMap& map) {
    require_finite(buf, "pwl_apply");
    ImageBuffer out = buf;
    for (double& v : out.values()) {
        v = map(v);
    }
    return out;
}

PwlMap pwl_from_stats(const ImageBuffer& buf, double p_low_frac, double p_high_frac) {
    const ImageBuffer lum = luminance(buf);
    const PercentilePair p = percentiles(lum.plane(0), kDefaultBins, p_low_frac, p_high_frac);
    const double lo = clamp_unit(p.low);
    const double hi = clamp_unit(p.high);
    if (hi - lo < kDegenerateSpan) {
        return PwlMap::identity();
    }
    std::vector<PwlPoint> points{{0.0, 0.0}};
    if (lo > 0.0) points.push_back({lo, 0.0});
    if (hi < 1.0) points.push_back({hi, 1.0});
    points.push_back({1.0, 1.0});
    return PwlMap(std::move(points));
}

// ---------------------------------------------------------------------------
// Stretch
// ---------------------------------------------------------------------------

void StretchParams::validate() const {
    if (!(p_low_frac >= 0.0 && p_low_frac < p_high_frac && p_high_frac <= 1.0)) {
        throw Error(ErrorCode::InvalidParameter, "stretch fractions must satisfy 0 <= low < high <= 1");
    }
}

StretchResult stretch(const ImageBuffer& buf, const StretchParams& p) {
    p.validate();
    require_finite(buf, "stretch");
    StretchResult result{buf, std::vector<bool>(static_cast<std::size_t>(buf.channels()), false)};

    PercentilePair pooled;
    if (!p.per_channel) {
        pooled = percentiles(buf.values(), kDefaultBins, p.p_low_frac, p.p_high_frac);
    }
    for (int c = 0; c < buf.channels(); ++c) {
        const PercentilePair bounds =
            p.per_channel ? percentiles(buf.plane(c), kDefaultBins, p.p_low_frac, p.p_high_frac)
                          : pooled;
        const double span = bounds.high - bounds.low;
        if (span < kDegenerateSpan) {
            result.degenerate[static_cast<std::size_t>(c)] = true;
            continue;
        }
        for (double& v : result.image.plane(c)) {
            v = clamp_unit((v - bounds.low) / span);
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// GOC
// ---------------------------------------------------------------------------

void GocParams::validate() const {
    if (variant != 2 && variant != 3) {
        throw Error(ErrorCode::InvalidParameter, "goc variant must be 2 or 3");
    }
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw Error(ErrorCode::InvalidParameter, "goc gamma must be positive");
    }
}

ImageBuffer align_channel_means(const ImageBuffer& buf) {
    require_colour(buf, "align_channel_means");
    double means[3];
    for (int c = 0; c < 3; ++c) {
        double sum = 0.0;
        for (double v : buf.plane(c)) sum += v;
        means[c] = sum / static_cast<double>(buf.plane_size());
    }
    const double target = (means[0] + means[1] + means[2]) / 3.0;
    ImageBuffer out = buf;
    for (int c = 0; c < 3; ++c) {
        const double offset = target - means[c];
        for (double& v : out.plane(c)) v += offset;
    }
    return out;
}

GocResult goc(const ImageBuffer& buf, const GocParams& p) {
    p.validate();
    require_finite(buf, "goc");
    GocResult result;
    if (buf.channels() == 3) {
        result.image = align_channel_means(buf);
    } else {
        result.image = buf;
        result.gray_world_skipped = true;
    }
    auto values = result.image.values();
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    const double lo = *mn;
    const double span = *mx - lo;
    for (double& v : values) {
        v = span >= kDegenerateSpan ? clamp_unit((v - lo) / span) : clamp_unit(v);
    }
    if (p.variant == 3 && p.gamma != 1.0) {
        for (double& v : values) v = std::pow(v, p.gamma);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Operators
// ---------------------------------------------------------------------------

std::string operator_name(const OperatorSpec& op) {
    return std::visit(Overloaded{
                          [](const ClaheParams&) -> std::string { return "clahe"; },
                          [](const PwlSpec&) -> std::string { return "pwl"; },
                          [](const StretchSpec& s) -> std::string {
                              return s.params.per_channel ? "hs" : "cs";
                          },
                          [](const GocParams& g) -> std::string {
                              return g.variant == 3 ? "goc3" : "goc2";
                          },
                      },
                      op);
}

OperatorSpec default_operator(const std::string& name) {
    if (name == "clahe") return ClaheParams{};
    if (name == "pwl") return PwlSpec{};
    if (name == "hs") return StretchSpec{StretchParams{0.01, 0.99, true}};
    if (name == "cs") return StretchSpec{StretchParams{0.01, 0.99, false}};
    if (name == "goc2") return GocParams{2, 1.0};
    if (name == "goc3") return GocParams{3, 0.8};
    throw Error(ErrorCode::InvalidConfig, "unknown operator '" + name + "'");
}

ImageBuffer apply_operator(const ImageBuffer& buf, const OperatorSpec& op) {
    return std::visit(Overloaded{
                          [&](const ClaheParams& p) { return clahe(buf, p); },
                          [&](const PwlSpec& s) {
                              if (s.points.empty()) {
                                  return pwl_apply(buf, pwl_from_stats(buf, s.p_low_frac, s.p_high_frac));
                              }
                              return pwl_apply(buf, PwlMap(s.points));
                          },
                          [&](const StretchSpec& s) { return stretch(buf, s.params).image; },
                          [&](const GocParams& p) { return goc(buf, p).image; },
                      },
                      op);
}

ImageBuffer cascade(const ImageBuffer& buf, const std::vector<OperatorSpec>& stages) {
    ImageBuffer current = buf;
    for (const OperatorSpec& op : stages) {
        current = apply_operator(current, op);
    }
    return current;
}

}  // namespace uwpde
