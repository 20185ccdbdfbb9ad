#pragma once

#include "uwpde/image.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace uwpde {

inline constexpr int kDefaultBins = 256;

/// Fixed-range [0,1] histogram; bin i covers [i/B, (i+1)/B), last bin closed.
struct Histogram {
    std::vector<std::uint64_t> counts;

    int bins() const noexcept { return static_cast<int>(counts.size()); }
    std::uint64_t total() const noexcept;
    double bin_center(int i) const noexcept { return (i + 0.5) / bins(); }

    static int bin_index(double v, int bins) noexcept;
};

struct ChannelStats {
    double mean = 0.0;
    double std = 0.0;   // population convention
    double mode = 0.0;  // center of the fullest bin, ties to the lowest index
    double min = 0.0;
    double max = 0.0;
    double p_low = 0.0;
    double p_high = 0.0;
};

struct QualityReport {
    double entropy = 0.0;
    double rms_contrast = 0.0;
    double colourfulness = 0.0;
    double mean_gradient = 0.0;
    double cast_score = 0.0;
};

Histogram histogram_of(std::span<const double> values, int bins);
Histogram channel_histogram(const ImageBuffer& buf, int channel, int bins = kDefaultBins);

/// Percentile pair of a sample set via the histogram CDF.
///
/// The low value is the smallest sample in the first bin whose cumulative
/// count reaches ceil(frac * N) (at least one sample); the high value is the
/// largest sample in the corresponding bin for its fraction. Fractions 0 and 1
/// therefore yield the exact minimum and maximum.
struct PercentilePair {
    double low = 0.0;
    double high = 0.0;
};
PercentilePair percentiles(std::span<const double> values, int bins, double low_frac,
                           double high_frac);

ChannelStats channel_stats(const ImageBuffer& buf, int channel, int bins = kDefaultBins,
                           double p_low_frac = 0.01, double p_high_frac = 0.99);
ChannelStats stats_of(std::span<const double> values, int bins = kDefaultBins,
                      double p_low_frac = 0.01, double p_high_frac = 0.99);

/// Largest pairwise distance between channel means; requires 3 channels.
double cast_score(const ImageBuffer& buf);

double shannon_entropy(const Histogram& hist);

/// Hasler-Susstrunk colourfulness on the [0,1] scale; 0 for grayscale.
double colourfulness(const ImageBuffer& buf);

QualityReport quality_report(const ImageBuffer& buf);

inline constexpr const char* kQualityCsvHeader =
    "image_id,entropy,rms_contrast,colourfulness,mean_gradient,cast_score";

std::string quality_csv_row(const std::string& image_id, const QualityReport& report);

/// Shortest-round-trip-stable decimal used by every CSV writer.
std::string format_real(double v);

}  // namespace uwpde
