#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "reptex/embedder.hpp"

namespace reptex {

struct ClusterModel {
    int k = 0;
    std::vector<EmbeddingVector> centroids;
    std::vector<int> assignments;
    double inertia = 0.0;
    double dbi = 0.0; // +inf when two centroids coincide
    int iterations = 0;
    std::vector<double> inertia_history; // after each assignment step

    std::vector<int> cluster_sizes() const;
};

struct KMeansOptions {
    int max_iterations = 300;
};

/// Lloyd's algorithm from k-means++ seeding. Throws TooFewVectors.
ClusterModel kmeans(std::span<const EmbeddingVector> vectors, int k, std::uint64_t seed,
                    const KMeansOptions& options = {});

/// Davies-Bouldin index with mean-distance scatter. Throws DuplicateCentroids.
double davies_bouldin(std::span<const EmbeddingVector> vectors, const ClusterModel& model);

struct KScore {
    int k = 0;
    double dbi = 0.0; // +inf when the run produced coincident centroids
    double inertia = 0.0;
};

struct KSelection {
    ClusterModel model;
    std::vector<KScore> scores; // ascending k
};

/// Runs kmeans for every k and keeps the minimum-DBI model (smaller k wins ties).
KSelection select_k(std::span<const EmbeddingVector> vectors, std::span<const int> k_set, std::uint64_t seed,
                    const KMeansOptions& options = {}, int workers = 1);

struct LargestCluster {
    int cluster_id = 0;
    std::vector<int> members; // ascending vector index
};

/// Most members; ties by smaller mean member-to-centroid distance, then smaller id.
LargestCluster largest_cluster(std::span<const EmbeddingVector> vectors, const ClusterModel& model);

} // namespace reptex
