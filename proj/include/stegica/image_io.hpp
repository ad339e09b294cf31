#pragma once

// PNG (8-bit RGB) and binary PPM (P6) decoding and encoding.

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "stegica/error.hpp"
#include "stegica/image.hpp"

namespace stegica {

/// Interleaved 8-bit RGB pixels straight from a decoder, before scaling.
struct Rgb8 {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> samples; // height * width * 3
};

namespace detail {

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw DataError("read failure on " + path.string());
    return bytes;
}

inline void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("write failure on " + path.string());
}

struct PngReadState {
    std::span<const std::uint8_t> src;
    std::size_t pos = 0;
    std::jmp_buf jump;
    char message[256] = {};
};

extern "C" inline void png_error_to_jump(png_structp png, png_const_charp msg) {
    auto* st = static_cast<PngReadState*>(png_get_error_ptr(png));
    std::snprintf(st->message, sizeof st->message, "%s", msg ? msg : "libpng error");
    std::longjmp(st->jump, 1);
}

extern "C" inline void png_warning_ignore(png_structp, png_const_charp) {}

extern "C" inline void png_read_from_span(png_structp png, png_bytep out, png_size_t n) {
    auto* st = static_cast<PngReadState*>(png_get_io_ptr(png));
    if (st->pos + n > st->src.size()) png_error(png, "truncated PNG stream");
    std::memcpy(out, st->src.data() + st->pos, n);
    st->pos += n;
}

// Decodes into `out`. Returns an empty string on success, else the reason.
// All non-trivial locals live in the caller so the longjmp skips no destructors.
inline std::string decode_png_into(std::span<const std::uint8_t> bytes, Rgb8& out,
                                   std::vector<png_bytep>& rows, PngReadState& st) {
    st.src = bytes;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &st, png_error_to_jump, png_warning_ignore);
    if (!png) return "libpng initialisation failed";
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        return "libpng initialisation failed";
    }
    if (setjmp(st.jump)) {
        png_destroy_read_struct(&png, &info, nullptr);
        return st.message;
    }
    png_set_read_fn(png, &st, png_read_from_span);
    png_read_info(png, info);

    const png_uint_32 w = png_get_image_width(png, info);
    const png_uint_32 h = png_get_image_height(png, info);
    const int depth = png_get_bit_depth(png, info);
    const int color = png_get_color_type(png, info);

    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) {
        png_destroy_read_struct(&png, &info, nullptr);
        return "grayscale input is not supported (RGB required)";
    }
    // Palette entries are always 8-bit RGB, whatever the index width.
    if (depth != 8 && color != PNG_COLOR_TYPE_PALETTE) {
        png_destroy_read_struct(&png, &info, nullptr);
        return "unsupported bit depth " + std::to_string(depth) + " (8-bit RGB required)";
    }
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_set_interlace_handling(png);
    png_read_update_info(png, info);
    if (png_get_rowbytes(png, info) != static_cast<png_size_t>(w) * 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        return "unexpected PNG row layout";
    }

    out.height = static_cast<int>(h);
    out.width = static_cast<int>(w);
    out.samples.assign(static_cast<std::size_t>(w) * h * 3, 0);
    rows.resize(h);
    for (png_uint_32 y = 0; y < h; ++y) rows[y] = out.samples.data() + static_cast<std::size_t>(y) * w * 3;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return {};
}

inline Rgb8 decode_png(std::span<const std::uint8_t> bytes, const std::string& name) {
    Rgb8 out;
    std::vector<png_bytep> rows;
    PngReadState st;
    const std::string err = decode_png_into(bytes, out, rows, st);
    if (!err.empty()) throw DataError(name + ": " + err);
    return out;
}

inline bool is_ppm_space(std::uint8_t c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

// Next header token of a Netpbm file, skipping whitespace and comments.
inline std::string ppm_token(std::span<const std::uint8_t> b, std::size_t& pos) {
    while (pos < b.size()) {
        if (is_ppm_space(b[pos])) {
            ++pos;
        } else if (b[pos] == '#') {
            while (pos < b.size() && b[pos] != '\n') ++pos;
        } else {
            break;
        }
    }
    std::string tok;
    while (pos < b.size() && !is_ppm_space(b[pos]) && b[pos] != '#') tok.push_back(static_cast<char>(b[pos++]));
    return tok;
}

inline int ppm_int(std::span<const std::uint8_t> b, std::size_t& pos, const std::string& name) {
    const std::string tok = ppm_token(b, pos);
    if (tok.empty() || tok.size() > 9 || !std::all_of(tok.begin(), tok.end(), [](char c) { return c >= '0' && c <= '9'; }))
        throw DataError(name + ": malformed PPM header");
    return std::stoi(tok);
}

inline Rgb8 decode_ppm(std::span<const std::uint8_t> b, const std::string& name) {
    std::size_t pos = 0;
    const std::string magic = ppm_token(b, pos);
    if (magic == "P5" || magic == "P2") throw DataError(name + ": grayscale input is not supported (RGB required)");
    if (magic != "P6") throw DataError(name + ": only binary PPM (P6) is supported");
    Rgb8 out;
    out.width = ppm_int(b, pos, name);
    out.height = ppm_int(b, pos, name);
    const int maxval = ppm_int(b, pos, name);
    if (maxval != 255) throw DataError(name + ": unsupported bit depth (maxval " + std::to_string(maxval) + ", 8-bit required)");
    if (pos >= b.size() || !is_ppm_space(b[pos])) throw DataError(name + ": malformed PPM header");
    ++pos;
    const std::size_t need = static_cast<std::size_t>(out.width) * out.height * 3;
    if (b.size() - pos < need) throw DataError(name + ": truncated PPM data");
    out.samples.assign(b.begin() + static_cast<std::ptrdiff_t>(pos), b.begin() + static_cast<std::ptrdiff_t>(pos + need));
    return out;
}

} // namespace detail

/// Decodes an 8-bit RGB PNG or P6 PPM without any rescaling.
inline Rgb8 decode_rgb8(const std::filesystem::path& path) {
    const auto bytes = detail::read_file_bytes(path);
    static constexpr std::uint8_t kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    if (bytes.size() >= 8 && std::equal(bytes.begin(), bytes.begin() + 8, kPngSig))
        return detail::decode_png(bytes, path.string());
    if (bytes.size() >= 2 && bytes[0] == 'P') return detail::decode_ppm(bytes, path.string());
    throw DataError(path.string() + ": unrecognised image format (PNG or P6 PPM expected)");
}

/// Loads an image as intensities sample/255. An odd trailing row or column
/// is cropped so both dimensions are even.
inline Image load_image(const std::filesystem::path& path) {
    const Rgb8 px = decode_rgb8(path);
    const int h = px.height - px.height % 2;
    const int w = px.width - px.width % 2;
    if (h == 0 || w == 0) throw DataError(path.string() + ": image too small after even-dimension crop");
    Raster r(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < kChannels; ++c)
                r.at(c, y, x) = px.samples[(static_cast<std::size_t>(y) * px.width + x) * 3 + c] / 255.0;
    return Image(std::move(r));
}

/// 8-bit samples of an image; intensities are rounded to the nearest level.
inline std::vector<std::uint8_t> to_rgb8(const Image& img) {
    std::vector<std::uint8_t> s(static_cast<std::size_t>(img.height()) * img.width() * 3);
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            for (int c = 0; c < kChannels; ++c)
                s[(static_cast<std::size_t>(y) * img.width() + x) * 3 + c] =
                    static_cast<std::uint8_t>(std::nearbyint(img.at(c, y, x) * 255.0));
    return s;
}

namespace detail {

struct PngWriteState {
    std::vector<std::uint8_t>* out = nullptr;
    std::jmp_buf jump;
    char message[256] = {};
};

extern "C" inline void png_write_error_to_jump(png_structp png, png_const_charp msg) {
    auto* st = static_cast<PngWriteState*>(png_get_error_ptr(png));
    std::snprintf(st->message, sizeof st->message, "%s", msg ? msg : "libpng error");
    std::longjmp(st->jump, 1);
}

extern "C" inline void png_write_to_vector(png_structp png, png_bytep data, png_size_t n) {
    auto* st = static_cast<PngWriteState*>(png_get_io_ptr(png));
    st->out->insert(st->out->end(), data, data + n);
}

extern "C" inline void png_flush_noop(png_structp) {}

inline std::string encode_png_into(const std::vector<std::uint8_t>& samples, int h, int w,
                                   std::vector<std::uint8_t>& out, std::vector<png_bytep>& rows,
                                   PngWriteState& st) {
    st.out = &out;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &st, png_write_error_to_jump, png_warning_ignore);
    if (!png) return "libpng initialisation failed";
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        return "libpng initialisation failed";
    }
    if (setjmp(st.jump)) {
        png_destroy_write_struct(&png, &info);
        return st.message;
    }
    png_set_write_fn(png, &st, png_write_to_vector, png_flush_noop);
    png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    rows.resize(static_cast<std::size_t>(h));
    for (int y = 0; y < h; ++y)
        rows[static_cast<std::size_t>(y)] = const_cast<png_bytep>(samples.data() + static_cast<std::size_t>(y) * w * 3);
    png_set_rows(png, info, rows.data());
    png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
    png_destroy_write_struct(&png, &info);
    return {};
}

} // namespace detail

inline std::vector<std::uint8_t> encode_png(const Image& img) {
    const auto samples = to_rgb8(img);
    std::vector<std::uint8_t> out;
    std::vector<png_bytep> rows;
    detail::PngWriteState st;
    const std::string err = detail::encode_png_into(samples, img.height(), img.width(), out, rows, st);
    if (!err.empty()) throw DataError("PNG encode failed: " + err);
    return out;
}

inline void save_png(const Image& img, const std::filesystem::path& path) {
    detail::write_file_bytes(path, encode_png(img));
}

inline void save_ppm(const Image& img, const std::filesystem::path& path) {
    const std::string header = "P6\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
    std::vector<std::uint8_t> bytes(header.begin(), header.end());
    const auto samples = to_rgb8(img);
    bytes.insert(bytes.end(), samples.begin(), samples.end());
    detail::write_file_bytes(path, bytes);
}

/// Writes a single plane as an 8-bit PGM, linearly stretched from its
/// [min, max] range to [0, 255]. For visual inspection only.
inline void save_pgm_stretched(std::span<const double> plane, int height, int width,
                               const std::filesystem::path& path) {
    if (plane.size() != static_cast<std::size_t>(height) * width) throw UsageError("plane size does not match dimensions");
    double lo = 0.0, hi = 0.0;
    if (!plane.empty()) {
        const auto [mn, mx] = std::minmax_element(plane.begin(), plane.end());
        lo = *mn;
        hi = *mx;
    }
    const double span = hi > lo ? hi - lo : 1.0;
    const std::string header = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    std::vector<std::uint8_t> bytes(header.begin(), header.end());
    for (double v : plane) bytes.push_back(static_cast<std::uint8_t>(std::nearbyint((v - lo) / span * 255.0)));
    detail::write_file_bytes(path, bytes);
}

} // namespace stegica
