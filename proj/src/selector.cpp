#include "reptex/selector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace reptex {

std::vector<double> center_distances(std::span<const EmbeddingVector> embeddings, const EmbeddingVector& center) {
    std::vector<double> out;
    out.reserve(embeddings.size());
    for (const auto& e : embeddings) out.push_back(euclidean_distance(e, center));
    return out;
}

double width_factor(int width, int height) {
    if (width < 1 || height < 1) throw Error(Errc::DegeneratePatch, "candidate has a zero dimension");
    return 1.0 / std::sqrt(static_cast<double>(width) * height);
}

namespace {

template <typename A, typename B>
double clamped_cosine(int n, A a, B b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (int i = 0; i < n; ++i) {
        dot += a(i) * b(i);
        na += a(i) * a(i);
        nb += b(i) * b(i);
    }
    const double denom = std::sqrt(na * nb);
    const double cos = denom > 0.0 ? dot / denom : 0.0;
    return std::clamp(cos, kBoundaryCosineFloor, 1.0);
}

} // namespace

std::pair<double, double> boundary_cosines(const GrayRaster& g) {
    const int w = g.width(), h = g.height();
    if (w < 2 || h < 2) throw Error(Errc::DegeneratePatch, "boundary factor needs at least 2x2 pixels");
    const double rows = clamped_cosine(w, [&](int x) { return g.at(x, 0); }, [&](int x) { return g.at(x, h - 1); });
    const double cols = clamped_cosine(h, [&](int y) { return g.at(0, y); }, [&](int y) { return g.at(w - 1, y); });
    return {rows, cols};
}

double boundary_factor(const GrayRaster& gray) {
    const auto [rows, cols] = boundary_cosines(gray);
    return 2.0 / (rows + cols);
}

int argmin_by_key(std::span<const double> values, std::span<const int> keys) {
    int best = -1;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (best < 0 || values[i] < values[best] || (values[i] == values[best] && keys[i] < keys[best]))
            best = static_cast<int>(i);
    }
    return best;
}

SelectionResult select(std::span<const Candidate> candidates, std::span<const EmbeddingVector> embeddings,
                       const ClusterModel& model) {
    if (candidates.size() != embeddings.size() || embeddings.size() != model.assignments.size())
        throw Error(Errc::DimensionMismatch, "candidates, embeddings and assignments must align");
    const LargestCluster largest = largest_cluster(embeddings, model);
    const EmbeddingVector& center = model.centroids[largest.cluster_id];

    SelectionResult r;
    r.cluster_id = largest.cluster_id;
    std::vector<EmbeddingVector> members;
    for (int i : largest.members) {
        r.member_indices.push_back(candidates[i].index);
        members.push_back(embeddings[i]);
    }
    r.distances = center_distances(members, center);
    for (std::size_t m = 0; m < largest.members.size(); ++m) {
        const Candidate& c = candidates[largest.members[m]];
        const double t = width_factor(c);
        const double b = boundary_factor(to_grayscale(c.patch));
        const double v = weight(t, b);
        r.width_factors.push_back(t);
        r.boundary_factors.push_back(b);
        r.weights.push_back(v);
        r.weighted_distances.push_back(weighted_distance(r.distances[m], v));
    }

    r.chosen_plain = r.member_indices[argmin_by_key(r.distances, r.member_indices)];
    r.chosen_weighted = r.member_indices[argmin_by_key(r.weighted_distances, r.member_indices)];

    std::vector<std::size_t> rank(r.member_indices.size());
    std::iota(rank.begin(), rank.end(), 0);
    std::sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
        return r.distances[a] != r.distances[b] ? r.distances[a] < r.distances[b]
                                                : r.member_indices[a] < r.member_indices[b];
    });
    r.chosen_median = r.member_indices[rank[(rank.size() - 1) / 2]];
    return r;
}

} // namespace reptex
