#include "uwpde/corpus.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>

namespace uwpde {

namespace {

constexpr double kPi = 3.14159265358979323846;

// mt19937 output is specified by the standard; the distributions are not.
class Rng {
public:
    explicit Rng(std::uint32_t seed) : engine_(seed) {}
    double uniform() { return engine_() / 4294967296.0; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    int below(int n) { return static_cast<int>(uniform() * n); }

private:
    std::mt19937 engine_;
};

double clamp_unit(double v) { return std::min(1.0, std::max(0.0, v)); }

struct Ellipse {
    double cx, cy, rx, ry, angle;
    std::array<double, 3> colour;
    double texture_freq;
};

struct WaterModel {
    std::array<double, 3> transmission;  // red attenuates most
    std::array<double, 3> veil;           // backscatter colour
    double exposure;
    double depth_falloff;
};

const char* cast_label(const WaterModel& m) {
    const auto& v = m.veil;
    if (v[2] > v[1] + 0.1 && v[2] > v[0] + 0.2) return "blue";
    if (v[1] > v[2] + 0.05) return "green";
    if (v[1] > v[0] + 0.15) return "teal";
    return "neutral";
}

ImageBuffer render_scene(Rng& rng, int extent, const WaterModel& water, int shapes, double stripe_amp) {
    ImageBuffer scene(extent, extent, 3);
    const std::array<double, 3> floor_colour{rng.uniform(0.4, 0.8), rng.uniform(0.35, 0.7), rng.uniform(0.25, 0.55)};
    const double stripe_freq = rng.uniform(2.0, 9.0);
    const double stripe_phase = rng.uniform(0.0, 2.0 * kPi);

    std::vector<Ellipse> blobs;
    for (int i = 0; i < shapes; ++i) {
        blobs.push_back({rng.uniform(0.1, 0.9) * extent, rng.uniform(0.1, 0.9) * extent,
                         rng.uniform(0.05, 0.22) * extent, rng.uniform(0.04, 0.15) * extent,
                         rng.uniform(0.0, kPi),
                         {rng.uniform(0.1, 1.0), rng.uniform(0.1, 1.0), rng.uniform(0.1, 1.0)},
                         rng.uniform(0.0, 0.6)});
    }

    for (int y = 0; y < extent; ++y) {
        const double fy = static_cast<double>(y) / (extent - 1);
        for (int x = 0; x < extent; ++x) {
            const double fx = static_cast<double>(x) / (extent - 1);
            const double ripple = stripe_amp * std::sin(2.0 * kPi * stripe_freq * fx + stripe_phase +
                                                        3.0 * std::sin(2.0 * kPi * fy));
            std::array<double, 3> c{};
            for (int k = 0; k < 3; ++k) {
                c[static_cast<std::size_t>(k)] = floor_colour[static_cast<std::size_t>(k)] * (0.55 + 0.45 * fy) + ripple;
            }
            for (const Ellipse& e : blobs) {
                const double dx = x - e.cx;
                const double dy = y - e.cy;
                const double u = (dx * std::cos(e.angle) + dy * std::sin(e.angle)) / e.rx;
                const double v = (-dx * std::sin(e.angle) + dy * std::cos(e.angle)) / e.ry;
                if (u * u + v * v <= 1.0) {
                    const double shade = 1.0 - 0.35 * (u * u + v * v) +
                                         0.15 * std::sin(e.texture_freq * (dx + 2.0 * dy));
                    for (int k = 0; k < 3; ++k) {
                        c[static_cast<std::size_t>(k)] = e.colour[static_cast<std::size_t>(k)] * shade;
                    }
                }
            }
            // Path length grows toward the top of the frame (farther water).
            const double distance = 1.0 + water.depth_falloff * (1.0 - fy);
            for (int k = 0; k < 3; ++k) {
                const auto uk = static_cast<std::size_t>(k);
                const double t = std::pow(water.transmission[uk], distance);
                const double noise = rng.uniform(-0.015, 0.015);
                scene(x, y, k) = clamp_unit(water.exposure * (c[uk] * t + water.veil[uk] * (1.0 - t)) + noise);
            }
        }
    }
    return scene;
}

}  // namespace

std::vector<CorpusImage> synthetic_corpus(int extent) {
    std::vector<CorpusImage> corpus;
    corpus.reserve(kCorpusSize);
    for (int i = 0; i < kCorpusSize; ++i) {
        Rng rng(static_cast<std::uint32_t>(1009 + 7919 * i));
        WaterModel water{};
        const int kind = i % 6;
        switch (kind) {
            case 0:  // blue water, moderate haze
                water = {{rng.uniform(0.25, 0.4), rng.uniform(0.6, 0.75), rng.uniform(0.8, 0.9)},
                         {0.05, rng.uniform(0.3, 0.45), rng.uniform(0.55, 0.75)}, 1.0, 1.0};
                break;
            case 1:  // green coastal water
                water = {{rng.uniform(0.3, 0.45), rng.uniform(0.75, 0.9), rng.uniform(0.55, 0.7)},
                         {0.08, rng.uniform(0.45, 0.6), rng.uniform(0.3, 0.4)}, 1.0, 0.8};
                break;
            case 2:  // dark deep water
                water = {{rng.uniform(0.2, 0.3), rng.uniform(0.5, 0.6), rng.uniform(0.65, 0.8)},
                         {0.02, 0.15, rng.uniform(0.3, 0.4)}, rng.uniform(0.35, 0.5), 1.2};
                break;
            case 3:  // faded, heavy backscatter
                water = {{rng.uniform(0.45, 0.55), rng.uniform(0.55, 0.65), rng.uniform(0.6, 0.7)},
                         {0.35, rng.uniform(0.55, 0.65), rng.uniform(0.6, 0.7)}, 1.0, 1.5};
                break;
            case 4:  // strong blue cast with misaligned channels
                water = {{rng.uniform(0.1, 0.2), rng.uniform(0.4, 0.5), rng.uniform(0.85, 0.95)},
                         {0.02, rng.uniform(0.2, 0.3), rng.uniform(0.75, 0.9)}, 1.0, 1.0};
                break;
            default:  // shallow, near neutral
                water = {{rng.uniform(0.7, 0.8), rng.uniform(0.8, 0.9), rng.uniform(0.82, 0.92)},
                         {0.3, 0.35, rng.uniform(0.4, 0.45)}, 1.0, 0.3};
                break;
        }
        const int shapes = 3 + rng.below(6);
        const double stripe_amp = rng.uniform(0.0, 0.12);
        ImageBuffer image = render_scene(rng, extent, water, shapes, stripe_amp);
        char name[64];
        static constexpr std::array<const char*, 6> kinds{"haze", "coastal", "deep", "faded", "cast", "shallow"};
        std::snprintf(name, sizeof(name), "scene%02d-%s-%s", i, kinds[static_cast<std::size_t>(kind)],
                      cast_label(water));
        corpus.push_back({name, std::move(image)});
    }
    return corpus;
}

ImageBuffer synthetic_cast_image(double k, int width, int height, unsigned seed) {
    Rng rng(seed);
    ImageBuffer out(width, height, 3);
    const double fx = rng.uniform(1.0, 3.0);
    const double fy = rng.uniform(1.0, 3.0);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double u = static_cast<double>(x) / width;
            const double v = static_cast<double>(y) / height;
            const double base = 0.5 + 0.3 * std::sin(2.0 * kPi * fx * u) * std::cos(2.0 * kPi * fy * v) +
                                0.15 * (u - 0.5) + rng.uniform(-0.04, 0.04);
            const double t = 0.05 + 0.6 * clamp_unit(base);
            out(x, y, 0) = t;
            out(x, y, 1) = t;
            out(x, y, 2) = clamp_unit(t + k);
        }
    }
    return out;
}

}  // namespace uwpde
