#include "reptex/raster.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

namespace reptex {

RasterImage::RasterImage(int width, int height, Rgb fill) : width_(width), height_(height) {
    if (width < 0 || height < 0) throw Error(Errc::ZeroDimension, "negative image dimensions");
    data_.resize(static_cast<std::size_t>(width) * height * 3);
    for (std::size_t i = 0; i < data_.size(); i += 3) {
        data_[i] = fill.r;
        data_[i + 1] = fill.g;
        data_[i + 2] = fill.b;
    }
}

RasterImage::RasterImage(int width, int height, std::vector<std::uint8_t> channels)
    : width_(width), height_(height), data_(std::move(channels)) {
    if (width < 0 || height < 0 || data_.size() != static_cast<std::size_t>(width) * height * 3)
        throw Error(Errc::DimensionMismatch, "channel buffer does not match width*height*3");
}

GrayRaster::GrayRaster(int width, int height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
    if (values_.size() != static_cast<std::size_t>(width) * height)
        throw Error(Errc::DimensionMismatch, "gray buffer does not match width*height");
}

MaskRaster::MaskRaster(int width, int height, bool fill)
    : width_(width), height_(height), bits_(static_cast<std::size_t>(width) * height, fill ? 1 : 0) {}

std::size_t MaskRaster::count() const noexcept {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

LabelRaster::LabelRaster(int width, int height, std::vector<ClassId> labels, ClassMap classes)
    : width_(width), height_(height), labels_(std::move(labels)), classes_(std::move(classes)) {
    if (labels_.size() != static_cast<std::size_t>(width) * height)
        throw Error(Errc::DimensionMismatch, "label buffer does not match width*height");
    std::array<bool, 256> seen{};
    for (ClassId v : labels_) seen[v] = true;
    for (int v = 0; v < 256; ++v) {
        if (seen[v] && !classes_.contains(static_cast<ClassId>(v)))
            throw Error(Errc::UnknownLabelValue, "label value " + std::to_string(v) + " not in class map");
    }
}

ClassId LabelRaster::class_id(const std::string& name) const {
    for (const auto& [id, n] : classes_)
        if (n == name) return id;
    throw Error(Errc::UnknownClass, "no class named '" + name + "'");
}

const std::string& LabelRaster::class_name(ClassId id) const {
    auto it = classes_.find(id);
    if (it == classes_.end()) throw Error(Errc::UnknownClass, "no class id " + std::to_string(id));
    return it->second;
}

double luma(Rgb c) noexcept {
    return (0.299 * c.r + 0.587 * c.g + 0.114 * c.b) / 255.0;
}

GrayRaster to_grayscale(const RasterImage& img) {
    std::vector<double> values(static_cast<std::size_t>(img.width()) * img.height());
    std::size_t i = 0;
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            values[i++] = std::clamp(luma(img.at(x, y)), 0.0, 1.0);
    return GrayRaster(img.width(), img.height(), std::move(values));
}

MaskRaster mask_from_labels(const LabelRaster& labels, ClassId target_class) {
    if (!labels.has_class(target_class))
        throw Error(Errc::UnknownClass, "target class " + std::to_string(target_class) + " not in class map");
    MaskRaster mask(labels.width(), labels.height());
    for (int y = 0; y < labels.height(); ++y)
        for (int x = 0; x < labels.width(); ++x)
            mask.set(x, y, labels.at(x, y) == target_class);
    return mask;
}

RasterImage crop(const RasterImage& img, int x, int y, int w, int h) {
    if (x < 0 || y < 0 || w < 1 || h < 1 || x + w > img.width() || y + h > img.height())
        throw Error(Errc::OutOfBounds, "crop rectangle leaves the image");
    std::vector<std::uint8_t> out(static_cast<std::size_t>(w) * h * 3);
    const auto src = img.channels();
    for (int j = 0; j < h; ++j) {
        const auto row = src.begin() + (static_cast<std::ptrdiff_t>(y + j) * img.width() + x) * 3;
        std::copy(row, row + static_cast<std::ptrdiff_t>(w) * 3, out.begin() + static_cast<std::ptrdiff_t>(j) * w * 3);
    }
    return RasterImage(w, h, std::move(out));
}

RasterImage resize_bilinear(const RasterImage& img, int out_w, int out_h) {
    if (img.empty() || out_w < 1 || out_h < 1) throw Error(Errc::ZeroDimension, "resize needs non-empty sizes");
    if (img.width() == out_w && img.height() == out_h) return img;
    const double sx = static_cast<double>(img.width()) / out_w;
    const double sy = static_cast<double>(img.height()) / out_h;
    RasterImage out(out_w, out_h);
    for (int y = 0; y < out_h; ++y) {
        const double py = std::clamp((y + 0.5) * sy - 0.5, 0.0, img.height() - 1.0);
        const int y0 = static_cast<int>(py);
        const int y1 = std::min(y0 + 1, img.height() - 1);
        const double fy = py - y0;
        for (int x = 0; x < out_w; ++x) {
            const double px = std::clamp((x + 0.5) * sx - 0.5, 0.0, img.width() - 1.0);
            const int x0 = static_cast<int>(px);
            const int x1 = std::min(x0 + 1, img.width() - 1);
            const double fx = px - x0;
            std::uint8_t v[3];
            for (int k = 0; k < 3; ++k) {
                const double top = (1 - fx) * img.channel(x0, y0, k) + fx * img.channel(x1, y0, k);
                const double bottom = (1 - fx) * img.channel(x0, y1, k) + fx * img.channel(x1, y1, k);
                v[k] = static_cast<std::uint8_t>(std::clamp(std::lround((1 - fy) * top + fy * bottom), 0L, 255L));
            }
            out.set(x, y, {v[0], v[1], v[2]});
        }
    }
    return out;
}

ClassMap load_class_map(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::UnreadableFile, "cannot open class map " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::InvalidConfig, "class map " + path.string() + ": " + e.what());
    }
    if (!j.is_object()) throw Error(Errc::InvalidConfig, "class map must be a JSON object");
    ClassMap map;
    for (const auto& [key, value] : j.items()) {
        int id = -1;
        try {
            std::size_t used = 0;
            id = std::stoi(key, &used);
            if (used != key.size()) id = -1;
        } catch (const std::exception&) {
        }
        if (id < 0 || id > 255 || !value.is_string())
            throw Error(Errc::InvalidConfig, "class map entry '" + key + "' must map 0..255 to a name");
        map[static_cast<ClassId>(id)] = value.get<std::string>();
    }
    return map;
}

} // namespace reptex
