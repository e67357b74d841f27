#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "reptex/sampler.hpp"
#include "reptex/selector.hpp"

namespace reptex {

struct Contamination {
    int block_size = 16;
    int count = 0;
    std::vector<Rgb> fills = {{0, 0, 0}, {128, 128, 128}}; // block i uses fills[i % size]
};

struct SynthSpec {
    RasterImage tile;
    int reps_x = 1;
    int reps_y = 1;
    double jitter_amp = 0.0; // additive uniform noise, fraction of full scale
    std::optional<Contamination> contamination;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SynthImage {
    RasterImage image;
    MaskRaster mask;       // all true
    MaskRaster noise_mask; // true exactly on contaminated pixels
    RasterImage truth_tile;
};

/// Tiles spec.tile, adds seeded jitter, then paints non-overlapping
/// contamination blocks at seeded positions.
SynthImage generate_tiled_image(const SynthSpec& spec);

/// Periodic brick-like RGB tile (two courses of running-bond bricks with soft
/// mortar joints) used as synthetic ground truth.
RasterImage make_brick_tile(int size, std::uint64_t seed);

/// Max over cyclic translations of the truth tile of the zero-normalised
/// cross-correlation of luminance, after resizing `extracted` to the tile size.
double ncc_score(const RasterImage& extracted, const RasterImage& truth_tile);

/// Share of the candidate footprint flagged in `noise_mask`. Throws OutOfBounds.
double contamination_fraction(const Candidate& cand, const MaskRaster& noise_mask);

struct CorpusStats {
    std::size_t images = 0;
    double plain_mean_side = 0.0;
    double weighted_mean_side = 0.0;
    double plain_boundary_similarity = 0.0;    // percent
    double weighted_boundary_similarity = 0.0; // percent
};

/// Mean of the two boundary cosines of a candidate, as a percentage.
double boundary_similarity_percent(const Candidate& cand);

/// `candidates[i]` are the candidates `results[i]` selected from.
CorpusStats corpus_stats(std::span<const SelectionResult> results,
                         std::span<const std::vector<Candidate>> candidates);

} // namespace reptex
