#pragma once

#include <span>
#include <utility>
#include <vector>

#include "reptex/cluster.hpp"
#include "reptex/embedder.hpp"
#include "reptex/sampler.hpp"

namespace reptex {

/// Lower clamp on each boundary cosine; bounds the boundary factor by 1/eps.
inline constexpr double kBoundaryCosineFloor = 1e-6;

struct SelectionResult {
    int cluster_id = 0;
    std::vector<int> member_indices;    // candidate indices, ascending
    std::vector<double> distances;      // D: embedding distance to the cluster centre
    std::vector<double> width_factors;  // T = 1 / sqrt(width * height)
    std::vector<double> boundary_factors; // B = 2 / (cos(top, bottom) + cos(left, right))
    std::vector<double> weights;        // V = T * B
    std::vector<double> weighted_distances; // W = D * V
    int chosen_plain = -1;    // argmin D
    int chosen_weighted = -1; // argmin W
    int chosen_median = -1;   // median rank of D; reported only
};

std::vector<double> center_distances(std::span<const EmbeddingVector> embeddings, const EmbeddingVector& center);

double width_factor(int width, int height);
inline double width_factor(const Candidate& c) { return width_factor(c.side, c.side); }

/// Clamped cosines of (top row, bottom row) and (left column, right column).
/// Throws DegeneratePatch for patches narrower or shorter than 2.
std::pair<double, double> boundary_cosines(const GrayRaster& gray);
double boundary_factor(const GrayRaster& gray);

inline double weight(double width_factor, double boundary_factor) { return width_factor * boundary_factor; }
inline double weighted_distance(double distance, double weight) { return distance * weight; }

/// Index of the smallest value; ties go to the smaller key.
int argmin_by_key(std::span<const double> values, std::span<const int> keys);

/// `embeddings` is aligned with `candidates`; `model` clusters those embeddings.
SelectionResult select(std::span<const Candidate> candidates, std::span<const EmbeddingVector> embeddings,
                       const ClusterModel& model);

} // namespace reptex
