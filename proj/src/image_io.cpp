#include "uwpde/error.hpp"
#include "uwpde/image.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>
#include <string>

namespace uwpde {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const noexcept {
        if (f != nullptr) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

std::string lower_extension(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    return ext;
}

// ---------------------------------------------------------------------------
// PNG
//
// libpng reports errors by longjmp. Every setjmp scope below holds only
// trivially destructible locals; buffers are owned by the callers.
// ---------------------------------------------------------------------------

struct PngErrorSink {
    char message[256] = {};
};

[[noreturn]] void png_error_handler(png_structp png, png_const_charp msg) {
    auto* sink = static_cast<PngErrorSink*>(png_get_error_ptr(png));
    if (sink != nullptr && msg != nullptr) {
        std::snprintf(sink->message, sizeof(sink->message), "%s", msg);
    }
    png_longjmp(png, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

struct PngHeader {
    png_uint_32 width = 0;
    png_uint_32 height = 0;
    int channels = 0;
    int bit_depth = 0;
    bool has_alpha = false;
    bool unsupported = false;
};

bool png_read_header(png_structp png, png_infop info, std::FILE* fp, PngHeader* hdr) {
    if (setjmp(png_jmpbuf(png))) {
        return false;
    }
    png_init_io(png, fp);
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const int color_type = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);
    hdr->width = png_get_image_width(png, info);
    hdr->height = png_get_image_height(png, info);

    if ((color_type & PNG_COLOR_MASK_ALPHA) != 0 || png_get_valid(png, info, PNG_INFO_tRNS) != 0) {
        hdr->has_alpha = true;
        return true;
    }
    switch (color_type) {
        case PNG_COLOR_TYPE_GRAY:
            hdr->channels = 1;
            if (depth < 8) png_set_expand_gray_1_2_4_to_8(png);
            break;
        case PNG_COLOR_TYPE_PALETTE:
            hdr->channels = 3;
            png_set_palette_to_rgb(png);
            break;
        case PNG_COLOR_TYPE_RGB:
            hdr->channels = 3;
            break;
        default:
            hdr->unsupported = true;
            return true;
    }
    png_read_update_info(png, info);
    hdr->bit_depth = png_get_bit_depth(png, info);
    return true;
}

bool png_read_rows(png_structp png, png_infop info, png_bytep* rows) {
    if (setjmp(png_jmpbuf(png))) {
        return false;
    }
    png_read_image(png, rows);
    png_read_end(png, info);
    return true;
}

ImageBuffer load_png(std::FILE* fp, const std::filesystem::path& path) {
    PngErrorSink sink;
    png_structp png =
        png_create_read_struct(PNG_LIBPNG_VER_STRING, &sink, png_error_handler, png_warning_handler);
    if (png == nullptr) {
        throw Error(ErrorCode::IoError, "png_create_read_struct failed");
    }
    png_infop info = png_create_info_struct(png);
    struct Guard {
        png_structp* png;
        png_infop* info;
        ~Guard() { png_destroy_read_struct(png, info, nullptr); }
    } guard{&png, &info};
    if (info == nullptr) {
        throw Error(ErrorCode::IoError, "png_create_info_struct failed");
    }

    PngHeader hdr;
    if (!png_read_header(png, info, fp, &hdr)) {
        throw Error(ErrorCode::CorruptData, path.string() + ": " + sink.message);
    }
    if (hdr.has_alpha) {
        throw Error(ErrorCode::UnsupportedFormat, path.string() + ": alpha channels are not supported");
    }
    if (hdr.unsupported || (hdr.bit_depth != 8 && hdr.bit_depth != 16)) {
        throw Error(ErrorCode::UnsupportedFormat, path.string() + ": unsupported PNG colour type");
    }

    const std::size_t bytes_per_sample = hdr.bit_depth == 16 ? 2 : 1;
    const std::size_t row_bytes = hdr.width * hdr.channels * bytes_per_sample;
    std::vector<unsigned char> raw(row_bytes * hdr.height);
    std::vector<png_bytep> rows(hdr.height);
    for (png_uint_32 y = 0; y < hdr.height; ++y) {
        rows[y] = raw.data() + y * row_bytes;
    }
    if (!png_read_rows(png, info, rows.data())) {
        throw Error(ErrorCode::CorruptData, path.string() + ": " + sink.message);
    }

    ImageBuffer out(static_cast<int>(hdr.width), static_cast<int>(hdr.height), hdr.channels);
    const double scale = hdr.bit_depth == 16 ? 65535.0 : 255.0;
    for (int y = 0; y < out.height(); ++y) {
        const unsigned char* row = rows[static_cast<std::size_t>(y)];
        for (int x = 0; x < out.width(); ++x) {
            for (int c = 0; c < out.channels(); ++c) {
                const std::size_t s = static_cast<std::size_t>(x * out.channels() + c);
                unsigned v = bytes_per_sample == 2 ? (unsigned{row[2 * s]} << 8) | row[2 * s + 1]
                                                   : unsigned{row[s]};
                out(x, y, c) = v / scale;
            }
        }
    }
    return out;
}

bool png_write_all(png_structp png, png_infop info, std::FILE* fp, png_uint_32 width,
                   png_uint_32 height, int color_type, int bit_depth, png_bytep* rows) {
    if (setjmp(png_jmpbuf(png))) {
        return false;
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, width, height, bit_depth, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows);
    png_write_end(png, info);
    return true;
}

// ---------------------------------------------------------------------------
// PPM / PGM
// ---------------------------------------------------------------------------

class PnmReader {
public:
    PnmReader(std::string bytes, std::string name) : bytes_(std::move(bytes)), name_(std::move(name)) {}

    unsigned next_uint() {
        skip_space_and_comments();
        if (pos_ >= bytes_.size() || !std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
            throw Error(ErrorCode::CorruptData, name_ + ": expected integer in PNM data");
        }
        unsigned long value = 0;
        while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
            value = value * 10 + static_cast<unsigned long>(bytes_[pos_] - '0');
            if (value > 0xFFFFFFFFul) {
                throw Error(ErrorCode::CorruptData, name_ + ": integer overflow in PNM data");
            }
            ++pos_;
        }
        return static_cast<unsigned>(value);
    }

    // Exactly one whitespace byte separates the header from binary samples.
    void skip_single_whitespace() {
        if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
            throw Error(ErrorCode::CorruptData, name_ + ": malformed PNM header");
        }
        ++pos_;
    }

    unsigned next_binary(std::size_t width) {
        if (pos_ + width > bytes_.size()) {
            throw Error(ErrorCode::CorruptData, name_ + ": truncated PNM sample data");
        }
        unsigned v = static_cast<unsigned char>(bytes_[pos_]);
        if (width == 2) {
            v = (v << 8) | static_cast<unsigned char>(bytes_[pos_ + 1]);
        }
        pos_ += width;
        return v;
    }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            const char ch = bytes_[pos_];
            if (ch == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(ch))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    std::string bytes_;
    std::string name_;
    std::size_t pos_ = 2;
};

ImageBuffer load_pnm(std::string bytes, const std::filesystem::path& path) {
    const char kind = bytes.size() >= 2 ? bytes[1] : '\0';
    int channels = 0;
    bool ascii = false;
    switch (kind) {
        case '2': channels = 1; ascii = true; break;
        case '3': channels = 3; ascii = true; break;
        case '5': channels = 1; break;
        case '6': channels = 3; break;
        default:
            throw Error(ErrorCode::UnsupportedFormat,
                        path.string() + ": unsupported PNM variant P" + std::string(1, kind));
    }
    PnmReader reader(std::move(bytes), path.string());
    const unsigned width = reader.next_uint();
    const unsigned height = reader.next_uint();
    const unsigned maxval = reader.next_uint();
    if (width == 0 || height == 0 || maxval == 0 || maxval > 65535) {
        throw Error(ErrorCode::CorruptData, path.string() + ": invalid PNM header values");
    }
    if (!ascii) {
        reader.skip_single_whitespace();
    }
    ImageBuffer out(static_cast<int>(width), static_cast<int>(height), channels);
    const std::size_t sample_width = maxval > 255 ? 2 : 1;
    const double scale = maxval;
    for (int y = 0; y < out.height(); ++y) {
        for (int x = 0; x < out.width(); ++x) {
            for (int c = 0; c < channels; ++c) {
                const unsigned v = ascii ? reader.next_uint() : reader.next_binary(sample_width);
                if (v > maxval) {
                    throw Error(ErrorCode::CorruptData, path.string() + ": sample exceeds maxval");
                }
                out(x, y, c) = v / scale;
            }
        }
    }
    return out;
}

unsigned quantize(double v, unsigned maxval) {
    const double q = std::round(std::min(1.0, std::max(0.0, v)) * maxval);
    return static_cast<unsigned>(q);
}

void save_pnm(const ImageBuffer& buf, const std::filesystem::path& path, int bit_depth,
              int out_channels) {
    const unsigned maxval = bit_depth == 16 ? 65535u : 255u;
    std::string data = std::string(out_channels == 3 ? "P6" : "P5") + "\n" +
                       std::to_string(buf.width()) + " " + std::to_string(buf.height()) + "\n" +
                       std::to_string(maxval) + "\n";
    data.reserve(data.size() + buf.size() * (bit_depth == 16 ? 2 : 1) * 3);
    for (int y = 0; y < buf.height(); ++y) {
        for (int x = 0; x < buf.width(); ++x) {
            for (int c = 0; c < out_channels; ++c) {
                const unsigned q = quantize(buf(x, y, buf.channels() == 1 ? 0 : c), maxval);
                if (bit_depth == 16) {
                    data.push_back(static_cast<char>(q >> 8));
                }
                data.push_back(static_cast<char>(q & 0xFF));
            }
        }
    }
    std::ofstream out(path, std::ios::binary);
    if (!out || !out.write(data.data(), static_cast<std::streamsize>(data.size()))) {
        throw Error(ErrorCode::IoError, "cannot write " + path.string());
    }
}

void save_png(const ImageBuffer& buf, const std::filesystem::path& path, int bit_depth) {
    const unsigned maxval = bit_depth == 16 ? 65535u : 255u;
    const std::size_t bytes_per_sample = bit_depth == 16 ? 2 : 1;
    const std::size_t row_bytes =
        static_cast<std::size_t>(buf.width()) * buf.channels() * bytes_per_sample;
    std::vector<unsigned char> raw(row_bytes * buf.height());
    std::vector<png_bytep> rows(static_cast<std::size_t>(buf.height()));
    for (int y = 0; y < buf.height(); ++y) {
        unsigned char* row = raw.data() + static_cast<std::size_t>(y) * row_bytes;
        rows[static_cast<std::size_t>(y)] = row;
        for (int x = 0; x < buf.width(); ++x) {
            for (int c = 0; c < buf.channels(); ++c) {
                const unsigned q = quantize(buf(x, y, c), maxval);
                const std::size_t s = static_cast<std::size_t>(x * buf.channels() + c);
                if (bit_depth == 16) {
                    row[2 * s] = static_cast<unsigned char>(q >> 8);
                    row[2 * s + 1] = static_cast<unsigned char>(q & 0xFF);
                } else {
                    row[s] = static_cast<unsigned char>(q);
                }
            }
        }
    }

    FilePtr fp(std::fopen(path.string().c_str(), "wb"));
    if (!fp) {
        throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    }
    PngErrorSink sink;
    png_structp png =
        png_create_write_struct(PNG_LIBPNG_VER_STRING, &sink, png_error_handler, png_warning_handler);
    if (png == nullptr) {
        throw Error(ErrorCode::IoError, "png_create_write_struct failed");
    }
    png_infop info = png_create_info_struct(png);
    struct Guard {
        png_structp* png;
        png_infop* info;
        ~Guard() { png_destroy_write_struct(png, info); }
    } guard{&png, &info};
    if (info == nullptr) {
        throw Error(ErrorCode::IoError, "png_create_info_struct failed");
    }
    const int color_type = buf.channels() == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY;
    if (!png_write_all(png, info, fp.get(), static_cast<png_uint_32>(buf.width()),
                       static_cast<png_uint_32>(buf.height()), color_type, bit_depth,
                       rows.data())) {
        throw Error(ErrorCode::IoError, path.string() + ": " + sink.message);
    }
}

}  // namespace

ImageBuffer load_image(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) {
        throw Error(ErrorCode::FileNotFound, path.string());
    }
    FilePtr fp(std::fopen(path.string().c_str(), "rb"));
    if (!fp) {
        throw Error(ErrorCode::FileNotFound, path.string());
    }
    unsigned char sig[8] = {};
    const std::size_t got = std::fread(sig, 1, sizeof(sig), fp.get());
    if (got == sizeof(sig) && png_sig_cmp(sig, 0, sizeof(sig)) == 0) {
        return load_png(fp.get(), path);
    }
    if (got >= 2 && sig[0] == 'P') {
        std::rewind(fp.get());
        std::string bytes;
        char chunk[65536];
        std::size_t n = 0;
        while ((n = std::fread(chunk, 1, sizeof(chunk), fp.get())) > 0) {
            bytes.append(chunk, n);
        }
        return load_pnm(std::move(bytes), path);
    }
    throw Error(ErrorCode::UnsupportedFormat, path.string() + ": not a PNG or PNM file");
}

void save_image(const ImageBuffer& buf, const std::filesystem::path& path, int bit_depth) {
    if (buf.empty()) {
        throw Error(ErrorCode::InvalidBufferState, "save_image: empty buffer");
    }
    require_finite(buf, "save_image");
    if (bit_depth != 8 && bit_depth != 16) {
        throw Error(ErrorCode::InvalidParameter,
                    "bit depth must be 8 or 16, got " + std::to_string(bit_depth));
    }
    const std::string ext = lower_extension(path);
    if (ext == ".png") {
        save_png(buf, path, bit_depth);
    } else if (ext == ".ppm") {
        save_pnm(buf, path, bit_depth, 3);
    } else if (ext == ".pgm") {
        if (buf.channels() != 1) {
            throw Error(ErrorCode::UnsupportedFormat, path.string() + ": PGM needs one channel");
        }
        save_pnm(buf, path, bit_depth, 1);
    } else {
        throw Error(ErrorCode::UnsupportedFormat, path.string() + ": unknown extension '" + ext + "'");
    }
}

}  // namespace uwpde
