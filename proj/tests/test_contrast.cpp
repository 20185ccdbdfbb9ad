#include <doctest.h>

#include "support.hpp"
#include "uwpde/analysis.hpp"
#include "uwpde/contrast.hpp"
#include "uwpde/corpus.hpp"
#include "uwpde/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace uwpde;

namespace {

ImageBuffer equalize_oracle(const ImageBuffer& img, int bins) {
    std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
    auto bin = [bins](double v) { return std::min(bins - 1, static_cast<int>(std::floor(v * bins))); };
    for (double v : img.values()) counts[static_cast<std::size_t>(bin(v))] += 1.0;
    std::partial_sum(counts.begin(), counts.end(), counts.begin());
    ImageBuffer out = img;
    for (double& v : out.values()) v = counts[static_cast<std::size_t>(bin(v))] / static_cast<double>(img.size());
    return out;
}

ClaheParams global_he(int bins = 256) {
    ClaheParams p;
    p.tiles_x = p.tiles_y = 1;
    p.bins = bins;
    p.clip_factor = ClaheParams::kNoClip;
    return p;
}

bool in_unit_range(const ImageBuffer& img) {
    return std::all_of(img.values().begin(), img.values().end(), [](double v) { return v >= 0.0 && v <= 1.0; });
}

}  // namespace

TEST_CASE("clahe 4x4 four-level example matches the oracle") {
    ImageBuffer img(4, 4, 1);
    for (int i = 0; i < 16; ++i) img.values()[static_cast<std::size_t>(i)] = (i % 4) / 3.0;
    const ImageBuffer out = clahe(img, global_he(4));
    // each level holds a quarter of the pixels
    CHECK(out(0, 0, 0) == 0.25);
    CHECK(out(1, 0, 0) == 0.5);
    CHECK(out(2, 0, 0) == 0.75);
    CHECK(out(3, 0, 0) == 1.0);
    CHECK(out == equalize_oracle(img, 4));
}

TEST_CASE("clahe single tile without clipping is global equalization") {
    std::mt19937 rng(31);
    for (int i = 0; i < 40; ++i) {
        const int w = 1 + static_cast<int>(rng() % 16);
        const int h = 1 + static_cast<int>(rng() % 16);
        ImageBuffer img = testing::random_image(rng, w, h, 1);
        if (i % 3 == 0) {
            for (double& v : img.values()) v = std::round(v * 5.0) / 5.0;
        }
        CHECK(max_abs_diff(clahe(img, global_he()), equalize_oracle(img, 256)) == 0.0);
    }
}

TEST_CASE("clahe on a uniform ramp is near identity") {
    ImageBuffer ramp(16, 16, 1);
    for (int i = 0; i < 256; ++i) ramp.values()[static_cast<std::size_t>(i)] = i / 255.0;
    CHECK(max_abs_diff(clahe(ramp, global_he()), ramp) <= 1.0 / 256.0);
}

TEST_CASE("clahe on a constant image is constant") {
    for (double level : {0.0, 0.3, 1.0}) {
        const ImageBuffer out = clahe(ImageBuffer(40, 24, 3, level), ClaheParams{});
        const double first = out.values()[0];
        CHECK(std::all_of(out.values().begin(), out.values().end(), [&](double v) { return v == first; }));
    }
}

TEST_CASE("clahe single-tile output ignores pixel order") {
    std::mt19937 rng(32);
    ClaheParams p = global_he();
    p.clip_factor = 2.0;
    ImageBuffer img = testing::random_image(rng, 12, 12, 1);
    const ImageBuffer a = clahe(img, p);
    std::vector<std::size_t> order(img.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    ImageBuffer shuffled(12, 12, 1);
    for (std::size_t i = 0; i < order.size(); ++i) shuffled.values()[i] = img.values()[order[i]];
    const ImageBuffer b = clahe(shuffled, p);
    for (std::size_t i = 0; i < order.size(); ++i) CHECK(b.values()[i] == a.values()[order[i]]);
}

TEST_CASE("clahe tile mapping clips and redistributes") {
    // 4 bins, 16 samples all in bin 1; clip 1.0 -> limit 4, excess 12, share 3 per bin
    const std::vector<double> m = clahe_tile_mapping({0, 16, 0, 0}, 1.0);
    REQUIRE(m.size() == 4);
    CHECK(m[0] == doctest::Approx(3.0 / 16.0));
    CHECK(m[1] == doctest::Approx(10.0 / 16.0));
    CHECK(m[2] == doctest::Approx(13.0 / 16.0));
    CHECK(m[3] == 1.0);
    // residual: excess 13 over 4 bins -> 3 each plus one extra from bin 0
    const std::vector<double> r = clahe_tile_mapping({0, 17, 0, 0}, 1.0);
    CHECK(r[0] == doctest::Approx(4.0 / 17.0));
    CHECK(r[1] == doctest::Approx(11.0 / 17.0));
    CHECK(r[3] == 1.0);
    const std::vector<double> plain = clahe_tile_mapping({2, 0, 1, 1}, ClaheParams::kNoClip);
    CHECK(plain == std::vector<double>{0.5, 0.5, 0.75, 1.0});
}

TEST_CASE("clahe params validation") {
    ClaheParams p;
    p.tiles_x = 0;
    CHECK_THROWS_AS(p.validate(), Error);
    p = ClaheParams{};
    p.clip_factor = 0.5;
    CHECK_THROWS_AS(p.validate(), Error);
    try {
        clahe(ImageBuffer(4, 4, 1), ClaheParams{});
        FAIL("expected ImageTooSmallForTiling");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ImageTooSmallForTiling);
    }
}

TEST_CASE("clahe luminance mode shifts channels together") {
    std::mt19937 rng(33);
    const ImageBuffer img = testing::random_image(rng, 32, 32, 3, 0.3, 0.6);
    ClaheParams p;
    p.per_channel = false;
    p.tiles_x = p.tiles_y = 2;
    const ImageBuffer out = clahe(img, p);
    CHECK(in_unit_range(out));
    // colour differences survive wherever nothing clamped
    int checked = 0;
    for (int y = 0; y < 32; ++y) {
        for (int x = 0; x < 32; ++x) {
            bool clamped = false;
            for (int c = 0; c < 3; ++c) clamped = clamped || out(x, y, c) == 0.0 || out(x, y, c) == 1.0;
            if (clamped) continue;
            ++checked;
            CHECK(out(x, y, 0) - out(x, y, 1) == doctest::Approx(img(x, y, 0) - img(x, y, 1)).epsilon(1e-9));
        }
    }
    CHECK(checked > 0);
}

TEST_CASE("pwl maps") {
    const PwlMap knee({{0.0, 0.0}, {0.5, 0.25}, {1.0, 1.0}});
    CHECK(knee(0.25) == 0.125);
    CHECK(knee(0.5) == 0.25);
    CHECK(knee(1.0) == 1.0);
    CHECK(knee(0.75) == 0.625);
    CHECK(PwlMap::identity().is_identity());

    std::mt19937 rng(34);
    const ImageBuffer img = testing::random_image(rng, 9, 9, 3);
    CHECK(pwl_apply(img, PwlMap::identity()) == img);

    auto invalid = [](std::vector<PwlPoint> pts) {
        try {
            PwlMap m(std::move(pts));
        } catch (const Error& e) {
            return e.code() == ErrorCode::InvalidMap;
        }
        return false;
    };
    CHECK(invalid({{0.0, 0.0}, {0.6, 0.5}, {0.4, 0.6}, {1.0, 1.0}}));
    CHECK(invalid({{0.0, 0.0}, {0.5, 0.7}, {0.7, 0.2}, {1.0, 1.0}}));
    CHECK(invalid({{0.1, 0.0}, {1.0, 1.0}}));
    CHECK(invalid({{0.0, 0.0}}));
    CHECK(invalid({{0.0, 0.0}, {1.0, 1.5}}));
}

TEST_CASE("pwl evaluates control points exactly and is monotone") {
    std::mt19937 rng(35);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 30; ++t) {
        std::vector<double> ins{0.0, 1.0}, outs{u(rng), u(rng), u(rng), u(rng)};
        for (int k = 0; k < 2; ++k) ins.push_back(u(rng));
        std::sort(ins.begin(), ins.end());
        std::sort(outs.begin(), outs.end());
        std::vector<PwlPoint> pts;
        for (std::size_t i = 0; i < 4; ++i) pts.push_back({ins[i], outs[i]});
        const PwlMap m(pts);
        for (const PwlPoint& p : pts) CHECK(m(p.in) == p.out);
        double prev = -1.0;
        for (int i = 0; i <= 1000; ++i) {
            const double v = m(i / 1000.0);
            CHECK(v >= prev);
            prev = v;
        }
    }
}

TEST_CASE("pwl from stats") {
    // luminance ramp 0..1 in 101 steps: percentiles land on the samples
    ImageBuffer ramp(101, 1, 1);
    for (int x = 0; x <= 100; ++x) ramp(x, 0, 0) = x / 100.0;
    const PwlMap full = pwl_from_stats(ramp, 0.0, 1.0);
    CHECK(full.is_identity());
    for (int x = 0; x <= 100; ++x) CHECK(full(x / 100.0) == doctest::Approx(x / 100.0).epsilon(1e-15));

    ImageBuffer mid(61, 1, 1);
    for (int x = 0; x <= 60; ++x) mid(x, 0, 0) = 0.2 + x / 100.0;
    const PwlMap m = pwl_from_stats(mid, 0.0, 1.0);
    CHECK(m(0.2) == 0.0);
    CHECK(m(0.5) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(m(0.8) == 1.0);

    CHECK(pwl_from_stats(ImageBuffer(5, 5, 3, 0.4)).is_identity());
}

TEST_CASE("stretch") {
    ImageBuffer ch(61, 1, 1);
    for (int x = 0; x <= 60; ++x) ch(x, 0, 0) = 0.2 + x / 100.0;
    StretchResult r = stretch(ch, StretchParams{0.0, 1.0, true});
    CHECK(r.image(0, 0, 0) == 0.0);
    CHECK(r.image(30, 0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.image(60, 0, 0) == 1.0);
    CHECK(r.degenerate == std::vector<bool>{false});

    r = stretch(ImageBuffer(4, 4, 3, 0.3), StretchParams{});
    CHECK(r.degenerate == std::vector<bool>{true, true, true});
    CHECK(r.image == ImageBuffer(4, 4, 3, 0.3));

    // pooled bounds (0, 1) leave both halves alone
    ImageBuffer two(51, 1, 3);
    for (int x = 0; x <= 50; ++x) {
        two(x, 0, 0) = x / 100.0;
        two(x, 0, 1) = 0.5 + x / 100.0;
        two(x, 0, 2) = 0.25;
    }
    const StretchResult cs = stretch(two, StretchParams{0.0, 1.0, false});
    CHECK(max_abs_diff(cs.image, two) <= 1e-15);
    const StretchResult hs = stretch(two, StretchParams{0.0, 1.0, true});
    CHECK(hs.image(50, 0, 0) == 1.0);
    CHECK(hs.image(0, 0, 1) == 0.0);
    CHECK(hs.degenerate == std::vector<bool>{false, false, true});

    CHECK_THROWS_AS(StretchParams({0.6, 0.5, true}).validate(), Error);
}

TEST_CASE("stretch with full fractions hits both ends") {
    std::mt19937 rng(36);
    for (int i = 0; i < 15; ++i) {
        const ImageBuffer img = testing::random_image(rng, 10, 10, 3, 0.1, 0.8);
        const StretchResult r = stretch(img, StretchParams{0.0, 1.0, true});
        for (int c = 0; c < 3; ++c) {
            const auto p = r.image.plane(c);
            CHECK(*std::min_element(p.begin(), p.end()) == 0.0);
            CHECK(*std::max_element(p.begin(), p.end()) == 1.0);
        }
    }
}

TEST_CASE("goc") {
    ImageBuffer img(2, 2, 3);
    const double means[3] = {0.4, 0.5, 0.6};
    for (int c = 0; c < 3; ++c) {
        for (int i = 0; i < 4; ++i) img.plane(c)[static_cast<std::size_t>(i)] = means[c] + 0.1 * (i % 2 ? 1 : -1);
    }
    const ImageBuffer aligned = align_channel_means(img);
    for (int c = 0; c < 3; ++c) CHECK(channel_stats(aligned, c).mean == doctest::Approx(0.5).epsilon(1e-15));

    const GocResult g2 = goc(img, GocParams{2, 1.0});
    const GocResult g3 = goc(img, GocParams{3, 1.0});
    CHECK(max_abs_diff(g2.image, g3.image) == 0.0);
    CHECK_FALSE(g2.gray_world_skipped);

    const GocResult gamma = goc(img, GocParams{3, 0.5});
    for (std::size_t i = 0; i < img.size(); ++i) {
        CHECK(gamma.image.values()[i] == doctest::Approx(std::sqrt(g2.image.values()[i])).epsilon(1e-15));
    }

    ImageBuffer gray(3, 1, 3);
    for (int c = 0; c < 3; ++c) {
        gray(0, 0, c) = 0.2;
        gray(1, 0, c) = 0.4;
        gray(2, 0, c) = 0.6;
    }
    CHECK(align_channel_means(gray) == gray);
    const ImageBuffer stretched = goc(gray, GocParams{2, 1.0}).image;
    CHECK(stretched(0, 0, 0) == 0.0);
    CHECK(stretched(2, 0, 2) == 1.0);

    const GocResult single = goc(ImageBuffer(3, 3, 1, 0.5), GocParams{2, 1.0});
    CHECK(single.gray_world_skipped);

    CHECK_THROWS_AS(GocParams({4, 1.0}).validate(), Error);
    CHECK_THROWS_AS(GocParams({3, 0.0}).validate(), Error);
}

TEST_CASE("goc aligns means on random images") {
    std::mt19937 rng(37);
    for (int i = 0; i < 10; ++i) {
        const ImageBuffer img = testing::random_image(rng, 12, 8, 3);
        const ImageBuffer a = align_channel_means(img);
        const double m0 = channel_stats(a, 0).mean;
        CHECK(std::abs(channel_stats(a, 1).mean - m0) < 1e-12);
        CHECK(std::abs(channel_stats(a, 2).mean - m0) < 1e-12);
    }
}

TEST_CASE("operators keep images in range") {
    std::mt19937 rng(38);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        const ImageBuffer img = testing::random_image(rng, 24 + i, 20, i % 2 ? 3 : 1);
        ClaheParams cp;
        cp.tiles_x = 1 + static_cast<int>(rng() % 6);
        cp.tiles_y = 1 + static_cast<int>(rng() % 6);
        cp.clip_factor = 1.0 + 5.0 * u(rng);
        cp.bins = 2 + static_cast<int>(rng() % 300);
        const double lo = 0.2 * u(rng);
        const std::vector<OperatorSpec> ops{cp, PwlSpec{{}, lo, lo + 0.5}, StretchSpec{{lo, 0.9, true}},
                                            StretchSpec{{lo, 0.9, false}}, GocParams{2, 1.0},
                                            GocParams{3, 0.3 + u(rng)}};
        for (const OperatorSpec& op : ops) {
            const ImageBuffer out = apply_operator(img, op);
            CHECK(out.same_shape(img));
            CHECK(in_unit_range(out));
            CHECK(cascade(img, {op}) == out);
        }
    }
}

TEST_CASE("operator names and cascades") {
    for (const char* name : {"clahe", "pwl", "hs", "cs", "goc2", "goc3"}) {
        CHECK(operator_name(default_operator(name)) == name);
    }
    CHECK_THROWS_AS(default_operator("sharpen"), Error);
    CHECK(std::get<GocParams>(default_operator("goc3")).gamma == 0.8);

    const ImageBuffer img = synthetic_corpus()[4].image;
    CHECK(cascade(img, {}) == img);
    const OperatorSpec ident = PwlSpec{{{0.0, 0.0}, {1.0, 1.0}}, 0.01, 0.99};
    CHECK(cascade(img, {ident, ident}) == img);
    const ImageBuffer manual = clahe(pwl_apply(img, pwl_from_stats(img)), ClaheParams{});
    CHECK(cascade(img, {default_operator("pwl"), default_operator("clahe")}) == manual);
}
