#include <doctest.h>

#include "support.hpp"
#include "uwpde/analysis.hpp"
#include "uwpde/corpus.hpp"
#include "uwpde/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace uwpde;

TEST_CASE("histogram bin rule") {
    ImageBuffer half(5, 4, 1, 0.5);
    const Histogram h = channel_histogram(half, 0, 256);
    CHECK(h.counts[128] == 20);
    CHECK(h.total() == 20);
    CHECK(std::count(h.counts.begin(), h.counts.end(), 0u) == 255);

    CHECK(Histogram::bin_index(1.0, 256) == 255);
    CHECK(Histogram::bin_index(0.0, 256) == 0);
    CHECK(Histogram::bin_index(255.5 / 256.0, 256) == 255);
    CHECK(Histogram::bin_index(0.25, 4) == 1);

    const std::vector<double> quarters{0.0, 0.25, 0.5, 0.75};
    CHECK(histogram_of(quarters, 4).counts == std::vector<std::uint64_t>{1, 1, 1, 1});

    CHECK_THROWS_AS(channel_histogram(half, 1), Error);
    CHECK_THROWS_AS(histogram_of(quarters, 1), Error);
}

TEST_CASE("histogram total equals pixel count") {
    std::mt19937 rng(21);
    for (int i = 0; i < 30; ++i) {
        const int w = 1 + static_cast<int>(rng() % 40);
        const int h = 1 + static_cast<int>(rng() % 40);
        const ImageBuffer img = testing::random_image(rng, w, h, 3);
        for (int bins : {2, 17, 256}) {
            CHECK(channel_histogram(img, static_cast<int>(rng() % 3), bins).total() ==
                  static_cast<std::uint64_t>(w * h));
        }
    }
}

TEST_CASE("channel stats on small channels") {
    ImageBuffer c(4, 4, 1, 0.5);
    ChannelStats s = channel_stats(c, 0);
    CHECK(s.mean == 0.5);
    CHECK(s.std == 0.0);
    CHECK(s.mode == 128.5 / 256.0);
    CHECK(s.min == 0.5);
    CHECK(s.max == 0.5);

    const std::vector<double> v{0.0, 0.0, 0.5, 1.0};
    s = stats_of(v);
    CHECK(s.mean == doctest::Approx(0.375).epsilon(1e-15));
    // sqrt(((0.375^2)*2 + 0.125^2 + 0.625^2) / 4)
    CHECK(s.std == doctest::Approx(0.4145780987944).epsilon(1e-12));
    CHECK(s.mode == 1.0 / 512.0);
    CHECK(s.min == 0.0);
    CHECK(s.max == 1.0);
}

TEST_CASE("stats match a brute-force two-pass computation") {
    std::mt19937 rng(22);
    for (int i = 0; i < 25; ++i) {
        const ImageBuffer img = testing::random_image(rng, 31, 17, 1, 0.1, 0.9);
        const auto p = img.plane(0);
        long double sum = 0;
        for (double x : p) sum += x;
        const double mean = static_cast<double>(sum / p.size());
        long double ss = 0;
        for (double x : p) ss += (x - mean) * (x - mean);
        const double sd = std::sqrt(static_cast<double>(ss / p.size()));
        const ChannelStats s = channel_stats(img, 0);
        CHECK(std::abs(s.mean - mean) <= 1e-12 * mean);
        CHECK(std::abs(s.std - sd) <= 1e-12 * sd);
        CHECK(s.min <= s.p_low);
        CHECK(s.p_low <= s.p_high);
        CHECK(s.p_high <= s.max);
        CHECK(s.mode >= 0.0);
        CHECK(s.mode <= 1.0);
    }
}

TEST_CASE("stats are invariant under pixel permutation") {
    std::mt19937 rng(23);
    for (int i = 0; i < 10; ++i) {
        ImageBuffer img = testing::random_image(rng, 20, 20, 1);
        // coarse values so the mode has ties
        for (double& v : img.values()) v = std::floor(v * 6.0) / 6.0;
        const ChannelStats a = channel_stats(img, 0);
        std::shuffle(img.values().begin(), img.values().end(), rng);
        const ChannelStats b = channel_stats(img, 0);
        CHECK(a.mode == b.mode);
        CHECK(a.min == b.min);
        CHECK(a.max == b.max);
        CHECK(a.p_low == b.p_low);
        CHECK(a.p_high == b.p_high);
        CHECK(a.mean == doctest::Approx(b.mean).epsilon(1e-14));
        CHECK(a.std == doctest::Approx(b.std).epsilon(1e-14));
    }
}

TEST_CASE("mode ties go to the lowest bin") {
    const std::vector<double> v{0.9, 0.9, 0.1, 0.1, 0.5};
    CHECK(stats_of(v).mode == Histogram{std::vector<std::uint64_t>(256)}.bin_center(25));
}

TEST_CASE("percentiles") {
    const std::vector<double> v{0.3, 0.7, 0.1, 0.9, 0.5};
    const PercentilePair full = percentiles(v, 256, 0.0, 1.0);
    CHECK(full.low == 0.1);
    CHECK(full.high == 0.9);
    const PercentilePair mid = percentiles(v, 256, 0.4, 0.6);
    CHECK(mid.low == 0.3);
    CHECK(mid.high == 0.5);
    CHECK_THROWS_AS(percentiles(v, 256, 0.6, 0.4), Error);
    CHECK_THROWS_AS(percentiles(v, 256, -0.1, 0.5), Error);
}

TEST_CASE("cast score") {
    ImageBuffer gray(4, 4, 3, 0.3);
    CHECK(cast_score(gray) == 0.0);

    ImageBuffer img(2, 2, 3);
    const double means[3] = {0.2, 0.5, 0.8};
    for (int c = 0; c < 3; ++c) {
        for (double& v : img.plane(c)) v = means[c];
    }
    CHECK(cast_score(img) == doctest::Approx(0.6).epsilon(1e-15));

    CHECK(cast_score(synthetic_cast_image(0.3)) >= 0.25);
    CHECK_THROWS_AS(cast_score(ImageBuffer(2, 2, 1)), Error);
}

TEST_CASE("cast score ignores a uniform brightness shift") {
    std::mt19937 rng(24);
    for (int i = 0; i < 10; ++i) {
        ImageBuffer img = testing::random_image(rng, 16, 16, 3, 0.2, 0.7);
        const double before = cast_score(img);
        for (double& v : img.values()) v += 0.17;
        CHECK(std::abs(cast_score(img) - before) <= 1e-12);
    }
}

TEST_CASE("entropy") {
    ImageBuffer ramp(256, 1, 1);
    for (int x = 0; x < 256; ++x) ramp(x, 0, 0) = x / 255.0;
    CHECK(shannon_entropy(channel_histogram(ramp, 0)) == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(shannon_entropy(channel_histogram(ImageBuffer(3, 3, 1, 0.2), 0)) == 0.0);

    std::mt19937 rng(25);
    for (int i = 0; i < 10; ++i) {
        const double e = quality_report(testing::random_image(rng, 9, 9, 3)).entropy;
        CHECK(e >= 0.0);
        CHECK(e <= 8.0);
    }
}

TEST_CASE("quality report") {
    const QualityReport flat = quality_report(ImageBuffer(8, 8, 3, 0.4));
    CHECK(flat.entropy == 0.0);
    CHECK(flat.rms_contrast == 0.0);
    CHECK(flat.colourfulness == 0.0);
    CHECK(flat.mean_gradient == 0.0);
    CHECK(flat.cast_score == 0.0);

    std::mt19937 rng(26);
    ImageBuffer gray(16, 16, 3);
    const ImageBuffer base = testing::random_image(rng, 16, 16, 1);
    for (int c = 0; c < 3; ++c) std::copy(base.plane(0).begin(), base.plane(0).end(), gray.plane(c).begin());
    const QualityReport g = quality_report(gray);
    CHECK(g.colourfulness == 0.0);
    CHECK(g.cast_score == 0.0);
    CHECK(g.rms_contrast > 0.0);

    // horizontal ramp: interior central differences are exactly the slope
    ImageBuffer ramp(10, 3, 1);
    for (int y = 0; y < 3; ++y) {
        for (int x = 0; x < 10; ++x) ramp(x, y, 0) = 0.1 * x;
    }
    // border columns see a one-sided half step
    CHECK(quality_report(ramp).mean_gradient == doctest::Approx((8 * 0.1 + 2 * 0.05) / 10.0).epsilon(1e-12));
    CHECK(quality_report(ramp).cast_score == 0.0);
}

TEST_CASE("colourfulness of saturated primaries") {
    ImageBuffer img(2, 1, 3, 0.0);
    img(0, 0, 0) = 1.0;  // red pixel
    img(1, 0, 2) = 1.0;  // blue pixel
    // rg = {1, 0}, yb = {0.5, -1}; std_rg 0.5, std_yb 0.75, mean_rg 0.5, mean_yb -0.25
    const double expected = std::sqrt(0.25 + 0.5625) + 0.3 * std::sqrt(0.25 + 0.0625);
    CHECK(colourfulness(img) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("csv formatting") {
    CHECK(std::string(kQualityCsvHeader) == "image_id,entropy,rms_contrast,colourfulness,mean_gradient,cast_score");
    CHECK(format_real(0.5) == "0.5");
    CHECK(format_real(-0.0) == "0");
    CHECK(format_real(1.0 / 3.0) == "0.3333333333");
    const std::string row = quality_csv_row("img", QualityReport{1, 2, 3, 4, 5});
    CHECK(row == "img,1,2,3,4,5");
}
