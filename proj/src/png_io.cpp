// PNG reading and writing on top of libpng's classic API.

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <memory>

#include <png.h>

#include "reptex/raster.hpp"

namespace reptex {
namespace {

struct FileCloser {
    void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

enum class ReadMode { Rgb, Gray, Index };

struct Decoded {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<std::uint8_t> data;
};

std::uint32_t read_be32(const unsigned char* p) {
    return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | p[3];
}

// libpng rejects a zero-sized IHDR with a generic error; peek at it first so
// the caller gets ZeroDimension rather than UnsupportedFormat.
void check_header(std::FILE* f, const std::filesystem::path& path) {
    unsigned char head[24];
    if (std::fread(head, 1, sizeof head, f) != sizeof head || png_sig_cmp(head, 0, 8) != 0)
        throw Error(Errc::UnsupportedFormat, path.string() + " is not a PNG file");
    if (std::memcmp(head + 12, "IHDR", 4) != 0)
        throw Error(Errc::UnsupportedFormat, path.string() + ": missing IHDR");
    if (read_be32(head + 16) == 0 || read_be32(head + 20) == 0)
        throw Error(Errc::ZeroDimension, path.string() + " has a zero dimension");
    std::rewind(f);
}

[[noreturn]] void on_png_error(png_structp png, png_const_charp) {
    std::longjmp(png_jmpbuf(png), 1);
}

void on_png_warning(png_structp, png_const_charp) {}

Decoded decode(const std::filesystem::path& path, ReadMode mode) {
    FilePtr file(std::fopen(path.c_str(), "rb"));
    if (!file) throw Error(Errc::UnreadableFile, "cannot open " + path.string());
    check_header(file.get(), path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, on_png_error, on_png_warning);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw Error(Errc::UnsupportedFormat, "libpng initialisation failed");
    }

    Decoded out;
    std::vector<png_bytep> rows;
    bool bad_layout = false;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error(Errc::UnsupportedFormat, "cannot decode " + path.string());
    }
    png_init_io(png, file.get());
    png_read_info(png, info);

    const int color = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);
    if (mode == ReadMode::Index) {
        // Raw sample values: palette indices or 8-bit gray, no expansion.
        if (depth != 8 || (color != PNG_COLOR_TYPE_PALETTE && color != PNG_COLOR_TYPE_GRAY))
            bad_layout = true;
    } else {
        if (depth == 16) png_set_strip_16(png);
        if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
        if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
        if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
        if (mode == ReadMode::Rgb) {
            if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
        } else if (color & PNG_COLOR_MASK_COLOR) {
            bad_layout = true;
        }
    }
    if (bad_layout) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error(Errc::UnsupportedFormat, path.string() + " has an unsupported pixel layout for this use");
    }
    png_read_update_info(png, info);

    out.width = static_cast<int>(png_get_image_width(png, info));
    out.height = static_cast<int>(png_get_image_height(png, info));
    out.channels = png_get_channels(png, info);
    const std::size_t stride = png_get_rowbytes(png, info);
    out.data.resize(stride * out.height);
    rows.resize(out.height);
    for (int y = 0; y < out.height; ++y) rows[y] = out.data.data() + stride * y;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return out;
}

void encode(const std::filesystem::path& path, int width, int height, int color_type,
            std::span<const std::uint8_t> data, int channels) {
    if (width < 1 || height < 1) throw Error(Errc::ZeroDimension, "cannot write an empty image");
    FilePtr file(std::fopen(path.c_str(), "wb"));
    if (!file) throw Error(Errc::UnwritableOutput, "cannot open " + path.string() + " for writing");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, on_png_error, on_png_warning);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw Error(Errc::UnwritableOutput, "libpng initialisation failed");
    }
    std::vector<png_const_bytep> rows(height);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error(Errc::UnwritableOutput, "cannot encode " + path.string());
    }
    png_init_io(png, file.get());
    png_set_compression_level(png, 6);
    png_set_IHDR(png, info, width, height, 8, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const std::size_t stride = static_cast<std::size_t>(width) * channels;
    for (int y = 0; y < height; ++y) rows[y] = data.data() + stride * y;
    png_write_rows(png, const_cast<png_bytepp>(rows.data()), height);
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    if (std::fflush(file.get()) != 0) throw Error(Errc::UnwritableOutput, "short write to " + path.string());
}

} // namespace

RasterImage load_image(const std::filesystem::path& path) {
    Decoded d = decode(path, ReadMode::Rgb);
    return RasterImage(d.width, d.height, std::move(d.data));
}

void save_image(const RasterImage& img, const std::filesystem::path& path) {
    encode(path, img.width(), img.height(), PNG_COLOR_TYPE_RGB, img.channels(), 3);
}

MaskRaster load_mask(const std::filesystem::path& path) {
    const Decoded d = decode(path, ReadMode::Gray);
    MaskRaster mask(d.width, d.height);
    for (int y = 0; y < d.height; ++y)
        for (int x = 0; x < d.width; ++x)
            mask.set(x, y, d.data[static_cast<std::size_t>(y) * d.width + x] != 0);
    return mask;
}

void save_mask(const MaskRaster& mask, const std::filesystem::path& path) {
    std::vector<std::uint8_t> gray(mask.bits().size());
    for (std::size_t i = 0; i < gray.size(); ++i) gray[i] = mask.bits()[i] ? 255 : 0;
    encode(path, mask.width(), mask.height(), PNG_COLOR_TYPE_GRAY, gray, 1);
}

LabelRaster load_labels(const std::filesystem::path& path, const ClassMap& class_map) {
    Decoded d = decode(path, ReadMode::Index);
    return LabelRaster(d.width, d.height, std::move(d.data), class_map);
}

void save_labels(std::span<const ClassId> labels, int width, int height, const std::filesystem::path& path) {
    if (labels.size() != static_cast<std::size_t>(width) * height)
        throw Error(Errc::DimensionMismatch, "label buffer does not match width*height");
    encode(path, width, height, PNG_COLOR_TYPE_GRAY, labels, 1);
}

} // namespace reptex
