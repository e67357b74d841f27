#pragma once

#include <set>
#include <vector>

#include "reptex/raster.hpp"

namespace reptex {

/// Maximal 4-connected run of background pixels.
struct Subarea {
    int id = 0;
    std::vector<Pixel> member_pixels; // row-major order
    Rect bounding_box;
    std::set<ClassId> bordering_separators; // separator classes 4-adjacent to the region

    std::size_t size() const noexcept { return member_pixels.size(); }
};

/// Connected background components, largest first; ties go to the smaller
/// (y, x) of the bounding box's top-left corner. Ids follow that order.
std::vector<Subarea> find_subareas(const LabelRaster& labels, ClassId background_class,
                                   const std::set<ClassId>& separator_classes);

MaskRaster subarea_mask(const Subarea& sub, int width, int height);

/// Pixel threshold below which a subarea cannot host a minimal crop.
inline std::size_t min_subarea_pixels(int min_side) {
    return static_cast<std::size_t>(min_side) * min_side * 2;
}

} // namespace reptex
