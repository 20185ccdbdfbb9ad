#include "render.hpp"

#include "uwpde/error.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <string_view>

namespace uwpde::cli {

namespace {

// 3x5 glyphs, rows top to bottom.
struct Glyph {
    char ch;
    std::string_view rows;
};

constexpr std::array<Glyph, 40> kFont{{
    {'a', "010101111101101"}, {'b', "110101110101110"}, {'c', "011100100100011"},
    {'d', "110101101101110"}, {'e', "111100110100111"}, {'f', "111100110100100"},
    {'g', "011100101101011"}, {'h', "101101111101101"}, {'i', "111010010010111"},
    {'j', "001001001101010"}, {'k', "101101110101101"}, {'l', "100100100100111"},
    {'m', "101111111101101"}, {'n', "110101101101101"}, {'o', "010101101101010"},
    {'p', "110101110100100"}, {'q', "010101101110011"}, {'r', "110101110101101"},
    {'s', "011100010001110"}, {'t', "111010010010010"}, {'u', "101101101101111"},
    {'v', "101101101101010"}, {'w', "101101111111101"}, {'x', "101101010101101"},
    {'y', "101101010010010"}, {'z', "111001010100111"}, {'0', "111101101101111"},
    {'1', "010110010010111"}, {'2', "110001010100111"}, {'3', "110001010001110"},
    {'4', "101101111001001"}, {'5', "111100110001110"}, {'6', "011100111101111"},
    {'7', "111001010010010"}, {'8', "111101111101111"}, {'9', "111101111001110"},
    {'-', "000000111000000"}, {'.', "000000000000010"}, {'_', "000000000000111"},
    {' ', "000000000000000"},
}};

std::string_view glyph_rows(char ch) {
    const char lower = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    for (const Glyph& g : kFont) {
        if (g.ch == lower) return g.rows;
    }
    return "111111111111111";
}

void draw_text(ImageBuffer& img, int x0, int y0, int max_width, const std::string& text) {
    constexpr int scale = 2;
    constexpr int advance = 4 * scale;
    int x = x0;
    for (char ch : text) {
        if (x + 3 * scale > x0 + max_width) break;
        const std::string_view rows = glyph_rows(ch);
        for (int r = 0; r < 5; ++r) {
            for (int col = 0; col < 3; ++col) {
                if (rows[static_cast<std::size_t>(r * 3 + col)] != '1') continue;
                for (int dy = 0; dy < scale; ++dy) {
                    for (int dx = 0; dx < scale; ++dx) {
                        const int px = x + col * scale + dx;
                        const int py = y0 + r * scale + dy;
                        if (!img.in_bounds(px, py, 0)) continue;
                        for (int c = 0; c < img.channels(); ++c) img(px, py, c) = 1.0;
                    }
                }
            }
        }
        x += advance;
    }
}

}  // namespace

ImageBuffer render_montage(const std::vector<ImageBuffer>& panels, const std::vector<std::string>& labels) {
    if (panels.empty()) {
        throw Error(ErrorCode::InvalidParameter, "montage needs at least one panel");
    }
    const int panel_h = panels.front().height();
    int total_w = 0;
    for (const ImageBuffer& p : panels) {
        if (p.height() != panel_h) {
            throw Error(ErrorCode::InvalidParameter, "montage panels must share a height");
        }
        total_w += p.width();
    }
    total_w += kMontageSeparator * static_cast<int>(panels.size() - 1);
    ImageBuffer out(total_w, panel_h + kLabelBand, 3, 0.12);

    int x0 = 0;
    for (std::size_t i = 0; i < panels.size(); ++i) {
        const ImageBuffer& p = panels[i];
        for (int y = 0; y < p.height(); ++y) {
            for (int x = 0; x < p.width(); ++x) {
                for (int c = 0; c < 3; ++c) {
                    out(x0 + x, kLabelBand + y, c) = p(x, y, p.channels() == 1 ? 0 : c);
                }
            }
        }
        if (i < labels.size()) {
            draw_text(out, x0 + 2, 2, p.width() - 2, labels[i]);
        }
        x0 += p.width() + kMontageSeparator;
    }
    return out;
}

ImageBuffer render_histogram_plot(const std::array<Histogram, 3>& hists, int height) {
    const int bins = hists[0].bins();
    std::uint64_t peak = 1;
    for (const Histogram& h : hists) {
        peak = std::max(peak, *std::max_element(h.counts.begin(), h.counts.end()));
    }
    ImageBuffer out(bins, height, 3, 0.08);
    for (int x = 0; x < bins; ++x) {
        for (int c = 0; c < 3; ++c) {
            const double frac = static_cast<double>(hists[static_cast<std::size_t>(c)].counts[static_cast<std::size_t>(x)]) /
                                static_cast<double>(peak);
            const int bar = static_cast<int>(frac * (height - 1) + 0.5);
            for (int y = 0; y < bar; ++y) {
                out(x, height - 1 - y, c) = 0.95;
            }
        }
    }
    return out;
}

}  // namespace uwpde::cli
