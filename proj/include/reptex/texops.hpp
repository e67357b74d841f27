#pragma once

#include <span>

#include "reptex/cluster.hpp"
#include "reptex/sampler.hpp"
#include "reptex/selector.hpp"

namespace reptex {

/// Modular repetition: out(x, y) = tex(x mod w, y mod h).
RasterImage tile_texture(const RasterImage& tex, int out_w, int out_h);

/// Colour used for cluster `id` in overlays.
Rgb cluster_color(int id) noexcept;

inline constexpr Rgb kPlainMarker{255, 0, 0};
inline constexpr Rgb kWeightedMarker{0, 0, 255};
inline constexpr Rgb kMedianMarker{0, 255, 0};

/// Candidate centres as 3x3 dots coloured by cluster, with rectangle outlines
/// for the plain (red), weighted (blue) and median (green) choices.
/// `model.assignments` is aligned with `candidates`.
RasterImage render_cluster_overlay(const RasterImage& img, std::span<const Candidate> candidates,
                                   const ClusterModel& model, const SelectionResult& result);

} // namespace reptex
