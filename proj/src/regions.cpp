#include "reptex/regions.hpp"

#include <algorithm>
#include <deque>
#include <limits>

namespace reptex {

std::vector<Subarea> find_subareas(const LabelRaster& labels, ClassId background_class,
                                   const std::set<ClassId>& separator_classes) {
    if (!labels.has_class(background_class))
        throw Error(Errc::UnknownClass, "background class " + std::to_string(background_class) + " not in class map");
    if (separator_classes.contains(background_class))
        throw Error(Errc::InvalidConfig, "background class cannot also be a separator");

    const int w = labels.width();
    const int h = labels.height();
    std::vector<int> component(static_cast<std::size_t>(w) * h, -1);
    std::vector<Subarea> found;
    std::deque<Pixel> queue;
    constexpr int dx[4] = {1, -1, 0, 0};
    constexpr int dy[4] = {0, 0, 1, -1};

    for (int sy = 0; sy < h; ++sy) {
        for (int sx = 0; sx < w; ++sx) {
            const std::size_t seed = static_cast<std::size_t>(sy) * w + sx;
            if (labels.at(sx, sy) != background_class || component[seed] >= 0) continue;

            const int comp = static_cast<int>(found.size());
            Subarea sub;
            int x0 = sx, y0 = sy, x1 = sx, y1 = sy;
            component[seed] = comp;
            queue.push_back({sx, sy});
            while (!queue.empty()) {
                const Pixel p = queue.front();
                queue.pop_front();
                sub.member_pixels.push_back(p);
                x0 = std::min(x0, p.x);
                x1 = std::max(x1, p.x);
                y0 = std::min(y0, p.y);
                y1 = std::max(y1, p.y);
                for (int d = 0; d < 4; ++d) {
                    const int nx = p.x + dx[d];
                    const int ny = p.y + dy[d];
                    if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                    const ClassId label = labels.at(nx, ny);
                    if (label != background_class) {
                        if (separator_classes.contains(label)) sub.bordering_separators.insert(label);
                        continue;
                    }
                    int& c = component[static_cast<std::size_t>(ny) * w + nx];
                    if (c >= 0) continue;
                    c = comp;
                    queue.push_back({nx, ny});
                }
            }
            std::sort(sub.member_pixels.begin(), sub.member_pixels.end(),
                      [](const Pixel& a, const Pixel& b) { return a.y != b.y ? a.y < b.y : a.x < b.x; });
            sub.bounding_box = {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
            found.push_back(std::move(sub));
        }
    }
    if (found.empty()) throw Error(Errc::NoBackgroundPixels, "no pixel carries the background class");

    std::stable_sort(found.begin(), found.end(), [](const Subarea& a, const Subarea& b) {
        if (a.size() != b.size()) return a.size() > b.size();
        if (a.bounding_box.y != b.bounding_box.y) return a.bounding_box.y < b.bounding_box.y;
        return a.bounding_box.x < b.bounding_box.x;
    });
    for (std::size_t i = 0; i < found.size(); ++i) found[i].id = static_cast<int>(i);
    return found;
}

MaskRaster subarea_mask(const Subarea& sub, int width, int height) {
    MaskRaster mask(width, height);
    for (const Pixel& p : sub.member_pixels) {
        if (p.x < 0 || p.y < 0 || p.x >= width || p.y >= height)
            throw Error(Errc::PixelOutOfBounds, "subarea pixel outside " + std::to_string(width) + "x" +
                                                    std::to_string(height));
        mask.set(p.x, p.y, true);
    }
    return mask;
}

} // namespace reptex
