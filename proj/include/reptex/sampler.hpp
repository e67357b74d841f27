#pragma once

#include <cstdint>
#include <vector>

#include "reptex/raster.hpp"

namespace reptex {

struct SamplerConfig {
    int sample_count = 10000;
    int min_side = 16;
    int max_side = 48;
    double coverage_threshold = 0.9;
    int max_attempts = 200000;
    std::uint64_t seed = 0;

    /// Throws InvalidConfig.
    void validate() const;
};

/// One accepted square crop.
struct Candidate {
    int index = 0;
    Pixel center;
    int side = 0;
    RasterImage patch;
    int subarea_id = 0;
    double mask_coverage = 0.0;

    Rect rect() const noexcept;
};

/// Square crop geometry shared by the sampler and everything that redraws
/// candidates: top-left at center - side/2 (integer division), half-open.
inline Rect centered_square(Pixel center, int side) noexcept {
    return {center.x - side / 2, center.y - side / 2, side, side};
}

inline Rect Candidate::rect() const noexcept { return centered_square(center, side); }

/// Summed-area table over a mask for O(1) rectangle counts.
class MaskIntegral {
public:
    explicit MaskIntegral(const MaskRaster& mask);
    std::int64_t count(const Rect& r) const noexcept;

private:
    int width_;
    std::vector<std::int64_t> sums_; // (width+1) x (height+1)
};

/// Fraction of true bits in the side×side square at top-left (x, y).
double coverage_fraction(const MaskRaster& mask, int x, int y, int side);

std::vector<Candidate> sample_candidates(const RasterImage& img, const MaskRaster& mask, const SamplerConfig& cfg,
                                         int subarea_id = 0, int workers = 1);

} // namespace reptex
