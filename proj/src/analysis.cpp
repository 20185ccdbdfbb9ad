#include "uwpde/analysis.hpp"

#include "uwpde/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

namespace uwpde {

namespace {

void check_bins(int bins) {
    if (bins < 2) {
        throw Error(ErrorCode::InvalidParameter, "histogram needs at least 2 bins");
    }
}

void check_fractions(double low, double high) {
    if (!(low >= 0.0 && low < high && high <= 1.0)) {
        throw Error(ErrorCode::InvalidParameter, "percentile fractions must satisfy 0 <= low < high <= 1");
    }
}

// Index of the first bin whose cumulative count reaches ceil(frac * n).
int cdf_bin(const Histogram& hist, double frac) {
    const std::uint64_t n = hist.total();
    auto target = static_cast<std::uint64_t>(std::ceil(frac * static_cast<double>(n)));
    target = std::max<std::uint64_t>(target, 1);
    std::uint64_t running = 0;
    for (int i = 0; i < hist.bins(); ++i) {
        running += hist.counts[static_cast<std::size_t>(i)];
        if (running >= target) return i;
    }
    return hist.bins() - 1;
}

// Histogram plus the smallest and largest sample seen in each bin.
struct BinnedSamples {
    Histogram hist;
    std::vector<double> lo;
    std::vector<double> hi;
};

BinnedSamples bin_samples(std::span<const double> values, int bins);

}  // namespace

std::uint64_t Histogram::total() const noexcept {
    return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

int Histogram::bin_index(double v, int bins) noexcept {
    if (!(v > 0.0)) return 0;
    const double scaled = std::floor(v * bins);
    if (scaled >= bins - 1) return bins - 1;
    return static_cast<int>(scaled);
}

Histogram histogram_of(std::span<const double> values, int bins) {
    check_bins(bins);
    Histogram hist;
    hist.counts.assign(static_cast<std::size_t>(bins), 0);
    for (double v : values) {
        ++hist.counts[static_cast<std::size_t>(Histogram::bin_index(v, bins))];
    }
    return hist;
}

Histogram channel_histogram(const ImageBuffer& buf, int channel, int bins) {
    if (channel < 0 || channel >= buf.channels()) {
        throw Error(ErrorCode::ChannelOutOfRange,
                    "channel " + std::to_string(channel) + " of " + std::to_string(buf.channels()));
    }
    return histogram_of(buf.plane(channel), bins);
}

namespace {

BinnedSamples bin_samples(std::span<const double> values, int bins) {
    BinnedSamples b;
    b.hist.counts.assign(static_cast<std::size_t>(bins), 0);
    b.lo.assign(static_cast<std::size_t>(bins), std::numeric_limits<double>::infinity());
    b.hi.assign(static_cast<std::size_t>(bins), -std::numeric_limits<double>::infinity());
    for (double v : values) {
        const auto i = static_cast<std::size_t>(Histogram::bin_index(v, bins));
        ++b.hist.counts[i];
        b.lo[i] = std::min(b.lo[i], v);
        b.hi[i] = std::max(b.hi[i], v);
    }
    return b;
}

PercentilePair percentiles_from(const BinnedSamples& b, double low_frac, double high_frac) {
    return {b.lo[static_cast<std::size_t>(cdf_bin(b.hist, low_frac))],
            b.hi[static_cast<std::size_t>(cdf_bin(b.hist, high_frac))]};
}

}  // namespace

PercentilePair percentiles(std::span<const double> values, int bins, double low_frac,
                           double high_frac) {
    check_bins(bins);
    check_fractions(low_frac, high_frac);
    if (values.empty()) {
        return {};
    }
    return percentiles_from(bin_samples(values, bins), low_frac, high_frac);
}

ChannelStats stats_of(std::span<const double> values, int bins, double p_low_frac,
                      double p_high_frac) {
    check_bins(bins);
    check_fractions(p_low_frac, p_high_frac);
    ChannelStats s;
    if (values.empty()) {
        return s;
    }
    const double n = static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / n;
    double sq = 0.0;
    for (double v : values) {
        const double d = v - s.mean;
        sq += d * d;
    }
    s.std = std::sqrt(sq / n);
    const BinnedSamples binned = bin_samples(values, bins);
    s.min = *std::find_if(binned.lo.begin(), binned.lo.end(), [](double v) { return std::isfinite(v); });
    s.max = *std::find_if(binned.hi.rbegin(), binned.hi.rend(), [](double v) { return std::isfinite(v); });
    if (s.min == s.max) {
        s.std = 0.0;
    }

    const auto& counts = binned.hist.counts;
    const auto fullest = std::max_element(counts.begin(), counts.end());
    s.mode = binned.hist.bin_center(static_cast<int>(fullest - counts.begin()));

    const PercentilePair p = percentiles_from(binned, p_low_frac, p_high_frac);
    s.p_low = p.low;
    s.p_high = p.high;
    return s;
}

ChannelStats channel_stats(const ImageBuffer& buf, int channel, int bins, double p_low_frac,
                           double p_high_frac) {
    if (channel < 0 || channel >= buf.channels()) {
        throw Error(ErrorCode::ChannelOutOfRange,
                    "channel " + std::to_string(channel) + " of " + std::to_string(buf.channels()));
    }
    return stats_of(buf.plane(channel), bins, p_low_frac, p_high_frac);
}

double cast_score(const ImageBuffer& buf) {
    require_colour(buf, "cast_score");
    double means[3];
    for (int c = 0; c < 3; ++c) {
        auto plane = buf.plane(c);
        double sum = 0.0;
        for (double v : plane) sum += v;
        means[c] = sum / static_cast<double>(plane.size());
    }
    return std::max({std::abs(means[0] - means[1]), std::abs(means[0] - means[2]),
                     std::abs(means[1] - means[2])});
}

double shannon_entropy(const Histogram& hist) {
    const double n = static_cast<double>(hist.total());
    if (n == 0.0) return 0.0;
    double h = 0.0;
    for (std::uint64_t count : hist.counts) {
        if (count == 0) continue;
        const double p = static_cast<double>(count) / n;
        h -= p * std::log2(p);
    }
    return std::max(0.0, h);
}

double colourfulness(const ImageBuffer& buf) {
    if (buf.channels() != 3) return 0.0;
    auto r = buf.plane(0);
    auto g = buf.plane(1);
    auto b = buf.plane(2);
    const double n = static_cast<double>(r.size());
    double mean_rg = 0.0;
    double mean_yb = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        mean_rg += r[i] - g[i];
        mean_yb += 0.5 * (r[i] + g[i]) - b[i];
    }
    mean_rg /= n;
    mean_yb /= n;
    double var_rg = 0.0;
    double var_yb = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double drg = (r[i] - g[i]) - mean_rg;
        const double dyb = (0.5 * (r[i] + g[i]) - b[i]) - mean_yb;
        var_rg += drg * drg;
        var_yb += dyb * dyb;
    }
    var_rg /= n;
    var_yb /= n;
    return std::sqrt(var_rg + var_yb) + 0.3 * std::sqrt(mean_rg * mean_rg + mean_yb * mean_yb);
}

QualityReport quality_report(const ImageBuffer& buf) {
    require_finite(buf, "quality_report");
    QualityReport q;
    for (int c = 0; c < buf.channels(); ++c) {
        q.entropy += shannon_entropy(channel_histogram(buf, c, kDefaultBins));
    }
    q.entropy /= buf.channels();

    const ImageBuffer lum = luminance(buf);
    q.rms_contrast = stats_of(lum.plane(0)).std;
    q.colourfulness = colourfulness(buf);

    const int w = lum.width();
    const int h = lum.height();
    double grad = 0.0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double gx = 0.5 * (lum(std::min(x + 1, w - 1), y, 0) - lum(std::max(x - 1, 0), y, 0));
            const double gy = 0.5 * (lum(x, std::min(y + 1, h - 1), 0) - lum(x, std::max(y - 1, 0), 0));
            grad += std::sqrt(gx * gx + gy * gy);
        }
    }
    q.mean_gradient = grad / static_cast<double>(lum.plane_size());
    q.cast_score = buf.channels() == 3 ? cast_score(buf) : 0.0;
    return q;
}

std::string format_real(double v) {
    if (v == 0.0) return "0";  // folds -0
    char text[40];
    std::snprintf(text, sizeof(text), "%.10g", v);
    return text;
}

std::string quality_csv_row(const std::string& image_id, const QualityReport& r) {
    return image_id + "," + format_real(r.entropy) + "," + format_real(r.rms_contrast) + "," +
           format_real(r.colourfulness) + "," + format_real(r.mean_gradient) + "," +
           format_real(r.cast_score);
}

}  // namespace uwpde
