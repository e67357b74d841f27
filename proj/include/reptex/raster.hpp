#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "reptex/error.hpp"

namespace reptex {

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct Rect {
    int x = 0, y = 0, w = 0, h = 0;
    friend bool operator==(const Rect&, const Rect&) = default;
};

struct Pixel {
    int x = 0, y = 0;
    friend bool operator==(const Pixel&, const Pixel&) = default;
};

/// Row-major 8-bit RGB image.
class RasterImage {
public:
    RasterImage() = default;
    RasterImage(int width, int height, Rgb fill = {});
    RasterImage(int width, int height, std::vector<std::uint8_t> channels);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool empty() const noexcept { return width_ == 0 || height_ == 0; }

    Rgb at(int x, int y) const noexcept {
        const std::size_t o = offset(x, y);
        return {data_[o], data_[o + 1], data_[o + 2]};
    }
    void set(int x, int y, Rgb c) noexcept {
        const std::size_t o = offset(x, y);
        data_[o] = c.r;
        data_[o + 1] = c.g;
        data_[o + 2] = c.b;
    }
    std::uint8_t channel(int x, int y, int c) const noexcept { return data_[offset(x, y) + c]; }

    std::span<const std::uint8_t> channels() const noexcept { return data_; }
    std::span<std::uint8_t> channels() noexcept { return data_; }

    friend bool operator==(const RasterImage&, const RasterImage&) = default;

private:
    std::size_t offset(int x, int y) const noexcept {
        return (static_cast<std::size_t>(y) * width_ + x) * 3;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

/// Luminance in [0, 1].
class GrayRaster {
public:
    GrayRaster() = default;
    GrayRaster(int width, int height, std::vector<double> values);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    double at(int x, int y) const noexcept { return values_[static_cast<std::size_t>(y) * width_ + x]; }
    std::span<const double> values() const noexcept { return values_; }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> values_;
};

class MaskRaster {
public:
    MaskRaster() = default;
    MaskRaster(int width, int height, bool fill = false);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool at(int x, int y) const noexcept { return bits_[static_cast<std::size_t>(y) * width_ + x] != 0; }
    void set(int x, int y, bool v) noexcept { bits_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0; }
    std::size_t count() const noexcept;

    std::span<const std::uint8_t> bits() const noexcept { return bits_; }

    friend bool operator==(const MaskRaster&, const MaskRaster&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> bits_;
};

using ClassId = std::uint8_t;
using ClassMap = std::map<ClassId, std::string>;

class LabelRaster {
public:
    LabelRaster() = default;
    /// Throws UnknownLabelValue if a label is missing from `classes`.
    LabelRaster(int width, int height, std::vector<ClassId> labels, ClassMap classes);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    ClassId at(int x, int y) const noexcept { return labels_[static_cast<std::size_t>(y) * width_ + x]; }
    std::span<const ClassId> labels() const noexcept { return labels_; }
    const ClassMap& class_names() const noexcept { return classes_; }

    bool has_class(ClassId id) const { return classes_.contains(id); }
    /// Throws UnknownClass.
    ClassId class_id(const std::string& name) const;
    const std::string& class_name(ClassId id) const;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<ClassId> labels_;
    ClassMap classes_;
};

GrayRaster to_grayscale(const RasterImage& img);
double luma(Rgb c) noexcept;

MaskRaster mask_from_labels(const LabelRaster& labels, ClassId target_class);

/// Bilinear resample with pixel-centre alignment and clamped borders.
RasterImage resize_bilinear(const RasterImage& img, int out_w, int out_h);

/// w×h sub-image with top-left (x, y). Throws OutOfBounds.
RasterImage crop(const RasterImage& img, int x, int y, int w, int h);
inline RasterImage crop(const RasterImage& img, Rect r) { return crop(img, r.x, r.y, r.w, r.h); }

// PNG I/O.
RasterImage load_image(const std::filesystem::path& path);
void save_image(const RasterImage& img, const std::filesystem::path& path);
MaskRaster load_mask(const std::filesystem::path& path);
void save_mask(const MaskRaster& mask, const std::filesystem::path& path);
LabelRaster load_labels(const std::filesystem::path& path, const ClassMap& class_map);
void save_labels(std::span<const ClassId> labels, int width, int height, const std::filesystem::path& path);

/// JSON object from pixel value (as a string key) to class name.
ClassMap load_class_map(const std::filesystem::path& path);

} // namespace reptex
