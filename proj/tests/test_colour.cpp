#include <doctest.h>

#include "support.hpp"
#include "uwpde/analysis.hpp"
#include "uwpde/colour.hpp"
#include "uwpde/corpus.hpp"
#include "uwpde/error.hpp"

#include <algorithm>
#include <cmath>

using namespace uwpde;

namespace {

ImageBuffer pixel(double r, double g, double b) {
    ImageBuffer img(1, 1, 3);
    img(0, 0, 0) = r;
    img(0, 0, 1) = g;
    img(0, 0, 2) = b;
    return img;
}

double range_of(const ImageBuffer& img) {
    const auto [lo, hi] = std::minmax_element(img.values().begin(), img.values().end());
    return *hi - *lo;
}

}  // namespace

TEST_CASE("rgb to xyz reference points") {
    const ImageBuffer black = rgb_to_xyz(pixel(0, 0, 0));
    for (double v : black.values()) CHECK(v == 0.0);
    const ImageBuffer white = rgb_to_xyz(pixel(1, 1, 1));
    // row sums of the D65 matrix
    CHECK(white(0, 0, 0) == doctest::Approx(0.95047).epsilon(1e-12));
    CHECK(white(0, 0, 1) == doctest::Approx(1.0000001).epsilon(1e-12));
    CHECK(white(0, 0, 2) == doctest::Approx(1.08883).epsilon(1e-12));
    CHECK(d65_white()[2] == white(0, 0, 2));
    CHECK_THROWS_AS(rgb_to_xyz(ImageBuffer(1, 1, 1)), Error);
    CHECK_THROWS_AS(xyz_to_rgb(ImageBuffer(1, 1, 1)), Error);
}

TEST_CASE("inverse matrix") {
    const Matrix3& inv = xyz_to_rgb_matrix();
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += kRgbToXyz[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] *
                                             inv[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
            CHECK(s == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-14));
        }
    }
}

TEST_CASE("colour round trips") {
    const ImageBuffer grey = pixel(0.5, 0.5, 0.5);
    CHECK(max_abs_diff(xyz_to_rgb(rgb_to_xyz(grey)), grey) <= 1e-10);

    std::mt19937 rng(41);
    const ImageBuffer img = testing::random_image(rng, 100, 100, 3);
    CHECK(max_abs_diff(xyz_to_rgb(rgb_to_xyz(img)), img) <= 1e-10);
    const ImageBuffer encoded = xyz_to_rgb(rgb_to_xyz(img, {true}), {true});
    CHECK(max_abs_diff(encoded, img) <= 1e-10);
}

TEST_CASE("rgb to xyz is linear") {
    std::mt19937 rng(42);
    const ImageBuffer p = testing::random_image(rng, 20, 20, 3);
    const ImageBuffer q = testing::random_image(rng, 20, 20, 3);
    const double a = 0.3, b = 0.55;
    ImageBuffer mix = p;
    for (std::size_t i = 0; i < mix.size(); ++i) mix.values()[i] = a * p.values()[i] + b * q.values()[i];
    const ImageBuffer fp = rgb_to_xyz(p), fq = rgb_to_xyz(q), fm = rgb_to_xyz(mix);
    for (std::size_t i = 0; i < fm.size(); ++i) {
        CHECK(std::abs(fm.values()[i] - (a * fp.values()[i] + b * fq.values()[i])) <= 1e-12);
    }
}

TEST_CASE("xyz to rgb clamps out-of-gamut input") {
    const ImageBuffer out = xyz_to_rgb(pixel(0.1, 0.9, 0.05));
    for (double v : out.values()) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("cast removal") {
    for (double k : {0.1, 0.2, 0.3}) {
        const ImageBuffer img = synthetic_cast_image(k);
        CHECK(cast_score(xyz_cast_removal(img)) < cast_score(img));
    }

    const ImageBuffer flat(6, 6, 3, 0.35);
    CHECK(xyz_cast_removal(flat) == flat);

    // black and white pixels pin every plane to its full range
    std::mt19937 rng(43);
    ImageBuffer full = testing::random_image(rng, 16, 16, 3);
    for (int c = 0; c < 3; ++c) {
        full(0, 0, c) = 0.0;
        full(1, 0, c) = 1.0;
    }
    CHECK(max_abs_diff(xyz_cast_removal(full), full) <= 1e-9);

    CHECK_THROWS_AS(xyz_cast_removal(ImageBuffer(2, 2, 1)), Error);
}

TEST_CASE("homomorphic transfer") {
    HomomorphicParams p;
    CHECK(homomorphic_transfer(0.0, p) == p.gamma_low);
    const double at_cutoff = homomorphic_transfer(p.cutoff_frac, p);
    CHECK(at_cutoff == doctest::Approx(p.gamma_low + (p.gamma_high - p.gamma_low) * (1.0 - std::exp(-1.0))));
    CHECK(homomorphic_transfer(0.5, p) == doctest::Approx(p.gamma_high).epsilon(1e-12));
    double prev = 0.0;
    for (int i = 0; i <= 50; ++i) {
        const double h = homomorphic_transfer(i / 100.0, p);
        CHECK(h >= prev);
        prev = h;
    }
}

TEST_CASE("homomorphic params validation") {
    HomomorphicParams p;
    p.gamma_low = 0.0;
    CHECK_THROWS_AS(p.validate(), Error);
    p = HomomorphicParams{};
    p.gamma_high = 0.3;
    CHECK_THROWS_AS(p.validate(), Error);
    p = HomomorphicParams{};
    p.log_floor = 0.0;
    CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("all-pass homomorphic filter is the identity") {
    HomomorphicParams p;
    p.gamma_low = p.gamma_high = 1.0;
    p.fuzzy_enabled = false;
    std::mt19937 rng(44);
    for (auto [w, h] : {std::pair{32, 32}, std::pair{17, 9}, std::pair{1, 5}}) {
        const ImageBuffer img = testing::random_image(rng, w, h, 3);
        CHECK(max_abs_diff(fuzzy_homomorphic(img, p), img) <= 1e-6);
    }
}

TEST_CASE("homomorphic on constant images") {
    for (double level : {0.0, 0.2, 0.9}) {
        const ImageBuffer out = fuzzy_homomorphic(ImageBuffer(20, 12, 1, level));
        const double first = out.values()[0];
        CHECK(std::all_of(out.values().begin(), out.values().end(),
                          [&](double v) { return std::abs(v - first) <= 1e-12; }));
        CHECK(first >= 0.0);
        CHECK(first <= 1.0);
    }
}

TEST_CASE("homomorphic widens a dark low-contrast image") {
    std::mt19937 rng(45);
    ImageBuffer dark(64, 48, 3);
    std::uniform_real_distribution<double> u(0.0, 0.1);
    for (int c = 0; c < 3; ++c) {
        for (int y = 0; y < 48; ++y) {
            for (int x = 0; x < 64; ++x) dark(x, y, c) = 0.05 + 0.1 * ((x / 8 + y / 8) % 2) + u(rng);
        }
    }
    for (double v : dark.values()) REQUIRE((v >= 0.05 && v <= 0.25));
    const ImageBuffer out = fuzzy_homomorphic(dark);
    CHECK(range_of(out) > range_of(dark));
    for (double v : out.values()) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("homomorphic output follows a shifted pattern") {
    const int n = 64;
    auto pattern = [](int x, int y) {
        return 0.5 + 0.2 * std::sin(2.0 * M_PI * x / 16.0) * std::cos(2.0 * M_PI * y / 8.0);
    };
    ImageBuffer a(n, n, 1), b(n, n, 1);
    const int shift = 3;
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            a(x, y, 0) = pattern(x, y);
            b(x, y, 0) = pattern(x + shift, y);
        }
    }
    HomomorphicParams p;
    p.fuzzy_center = 0.5;
    const ImageBuffer fa = fuzzy_homomorphic(a, p), fb = fuzzy_homomorphic(b, p);
    double worst = 0.0;
    for (int y = 8; y < n - 8; ++y) {
        for (int x = 8; x < n - 8 - shift; ++x) worst = std::max(worst, std::abs(fb(x, y, 0) - fa(x + shift, y, 0)));
    }
    CHECK(worst < 1e-3);
}
