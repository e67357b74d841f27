#include "reptex/texops.hpp"

#include <array>

namespace reptex {

RasterImage tile_texture(const RasterImage& tex, int out_w, int out_h) {
    if (tex.empty()) throw Error(Errc::ZeroDimension, "cannot tile an empty texture");
    if (out_w < 1 || out_h < 1) throw Error(Errc::ZeroDimension, "tiled output must be at least 1x1");
    RasterImage out(out_w, out_h);
    for (int y = 0; y < out_h; ++y)
        for (int x = 0; x < out_w; ++x) out.set(x, y, tex.at(x % tex.width(), y % tex.height()));
    return out;
}

Rgb cluster_color(int id) noexcept {
    static constexpr std::array<Rgb, 8> palette = {{
        {255, 165, 0},   // orange
        {0, 200, 200},   // cyan
        {200, 0, 200},   // magenta
        {255, 255, 0},   // yellow
        {128, 64, 255},  // violet
        {0, 160, 80},    // teal green
        {255, 105, 180}, // pink
        {139, 69, 19},   // brown
    }};
    return palette[static_cast<std::size_t>(id) % palette.size()];
}

namespace {

void put(RasterImage& img, int x, int y, Rgb c) {
    if (x >= 0 && y >= 0 && x < img.width() && y < img.height()) img.set(x, y, c);
}

void outline(RasterImage& img, const Rect& r, Rgb c) {
    for (int x = r.x; x < r.x + r.w; ++x) {
        put(img, x, r.y, c);
        put(img, x, r.y + r.h - 1, c);
    }
    for (int y = r.y; y < r.y + r.h; ++y) {
        put(img, r.x, y, c);
        put(img, r.x + r.w - 1, y, c);
    }
}

const Candidate* find_candidate(std::span<const Candidate> candidates, int index) {
    for (const Candidate& c : candidates)
        if (c.index == index) return &c;
    return nullptr;
}

} // namespace

RasterImage render_cluster_overlay(const RasterImage& img, std::span<const Candidate> candidates,
                                   const ClusterModel& model, const SelectionResult& result) {
    RasterImage out = img;
    if (candidates.empty()) return out;
    if (model.assignments.size() != candidates.size())
        throw Error(Errc::DimensionMismatch, "cluster assignments do not match the candidates");
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const Rgb color = cluster_color(model.assignments[i]);
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) put(out, candidates[i].center.x + dx, candidates[i].center.y + dy, color);
    }
    // Later outlines overwrite earlier ones; blue ends on top.
    const std::pair<int, Rgb> marks[] = {
        {result.chosen_median, kMedianMarker}, {result.chosen_plain, kPlainMarker}, {result.chosen_weighted, kWeightedMarker}};
    for (const auto& [index, color] : marks)
        if (const Candidate* c = find_candidate(candidates, index)) outline(out, c->rect(), color);
    return out;
}

} // namespace reptex
