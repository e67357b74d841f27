#include "reptex/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "reptex/parallel.hpp"
#include "reptex/rng.hpp"

namespace reptex {
namespace {

double squared_distance(const EmbeddingVector& a, const EmbeddingVector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

void check_dimensions(std::span<const EmbeddingVector> vectors) {
    for (const auto& v : vectors)
        if (v.size() != vectors.front().size()) throw Error(Errc::DimensionMismatch, "vectors differ in dimension");
}

// Returns the inertia of the nearest-centroid assignment written to `assign`.
double assign_nearest(std::span<const EmbeddingVector> vectors, const std::vector<EmbeddingVector>& centroids,
                      std::vector<int>& assign) {
    double inertia = 0.0;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        int best = 0;
        double best_d = squared_distance(vectors[i], centroids[0]);
        for (std::size_t c = 1; c < centroids.size(); ++c) {
            const double d = squared_distance(vectors[i], centroids[c]);
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(c);
            }
        }
        assign[i] = best;
        inertia += best_d;
    }
    return inertia;
}

std::vector<EmbeddingVector> plus_plus_seeds(std::span<const EmbeddingVector> vectors, int k, CounterRng& rng) {
    const std::size_t n = vectors.size();
    std::vector<EmbeddingVector> centroids;
    centroids.push_back(vectors[rng.below(n)]);
    std::vector<double> nearest(n);
    for (std::size_t i = 0; i < n; ++i) nearest[i] = squared_distance(vectors[i], centroids[0]);
    while (static_cast<int>(centroids.size()) < k) {
        double total = 0.0;
        for (double d : nearest) total += d;
        std::size_t pick = n - 1;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                acc += nearest[i];
                if (acc > target && nearest[i] > 0.0) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = rng.below(n);
        }
        centroids.push_back(vectors[pick]);
        for (std::size_t i = 0; i < n; ++i)
            nearest[i] = std::min(nearest[i], squared_distance(vectors[i], centroids.back()));
    }
    return centroids;
}

} // namespace

std::vector<int> ClusterModel::cluster_sizes() const {
    std::vector<int> sizes(k, 0);
    for (int a : assignments) ++sizes[a];
    return sizes;
}

ClusterModel kmeans(std::span<const EmbeddingVector> vectors, int k, std::uint64_t seed,
                    const KMeansOptions& options) {
    if (k < 2) throw Error(Errc::InvalidConfig, "k must be >= 2");
    if (static_cast<int>(vectors.size()) < k)
        throw Error(Errc::TooFewVectors, std::to_string(vectors.size()) + " vectors cannot form " +
                                             std::to_string(k) + " clusters");
    check_dimensions(vectors);

    const std::size_t n = vectors.size();
    const std::size_t dim = vectors.front().size();
    CounterRng rng(seed, tag_of("kmeans++"));

    ClusterModel model;
    model.k = k;
    model.centroids = plus_plus_seeds(vectors, k, rng);
    model.assignments.assign(n, -1);
    std::vector<int> previous;

    for (int iter = 0; iter < options.max_iterations; ++iter) {
        previous = model.assignments;
        model.inertia = assign_nearest(vectors, model.centroids, model.assignments);
        model.inertia_history.push_back(model.inertia);
        model.iterations = iter + 1;
        if (model.assignments == previous || iter + 1 == options.max_iterations) break;

        std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
        std::vector<int> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const int c = model.assignments[i];
            ++counts[c];
            for (std::size_t d = 0; d < dim; ++d) sums[c][d] += vectors[i][d];
        }
        for (int c = 0; c < k; ++c)
            if (counts[c] > 0)
                for (std::size_t d = 0; d < dim; ++d) model.centroids[c].values[d] = sums[c][d] / counts[c];

        // Empty clusters take over the point farthest from its own centroid.
        for (int c = 0; c < k; ++c) {
            if (counts[c] > 0) continue;
            std::size_t far = 0;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (counts[model.assignments[i]] <= 1) continue;
                const double d = squared_distance(vectors[i], model.centroids[model.assignments[i]]);
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            --counts[model.assignments[far]];
            model.assignments[far] = c;
            counts[c] = 1;
            model.centroids[c] = vectors[far];
        }
    }
    try {
        model.dbi = davies_bouldin(vectors, model);
    } catch (const Error& e) {
        if (e.code() != Errc::DuplicateCentroids) throw;
        model.dbi = std::numeric_limits<double>::infinity();
    }
    return model;
}

double davies_bouldin(std::span<const EmbeddingVector> vectors, const ClusterModel& model) {
    if (vectors.size() != model.assignments.size())
        throw Error(Errc::DimensionMismatch, "assignments do not match the vectors");
    const int k = model.k;
    std::vector<double> scatter(k, 0.0);
    std::vector<int> counts(k, 0);
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        const int c = model.assignments[i];
        scatter[c] += euclidean_distance(vectors[i], model.centroids[c]);
        ++counts[c];
    }
    for (int c = 0; c < k; ++c)
        if (counts[c] > 0) scatter[c] /= counts[c];

    double total = 0.0;
    for (int i = 0; i < k; ++i) {
        double worst = 0.0;
        for (int j = 0; j < k; ++j) {
            if (i == j) continue;
            const double sep = euclidean_distance(model.centroids[i], model.centroids[j]);
            if (sep == 0.0) throw Error(Errc::DuplicateCentroids, "clusters " + std::to_string(i) + " and " +
                                                                      std::to_string(j) + " share a centroid");
            worst = std::max(worst, (scatter[i] + scatter[j]) / sep);
        }
        total += worst;
    }
    return total / k;
}

KSelection select_k(std::span<const EmbeddingVector> vectors, std::span<const int> k_set, std::uint64_t seed,
                    const KMeansOptions& options, int workers) {
    const std::set<int> ks(k_set.begin(), k_set.end());
    if (ks.empty()) throw Error(Errc::InvalidConfig, "k_set is empty");
    const std::vector<int> ordered(ks.begin(), ks.end());

    std::vector<ClusterModel> runs(ordered.size());
    parallel_for(ordered.size(), workers, [&](std::size_t i) {
        const int k = ordered[i];
        runs[i] = kmeans(vectors, k, derive_seed(seed, static_cast<std::uint64_t>(k)), options);
    });

    KSelection out;
    std::size_t best = 0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        out.scores.push_back({runs[i].k, runs[i].dbi, runs[i].inertia});
        if (runs[i].dbi < runs[best].dbi) best = i;
    }
    out.model = std::move(runs[best]);
    return out;
}

LargestCluster largest_cluster(std::span<const EmbeddingVector> vectors, const ClusterModel& model) {
    const auto sizes = model.cluster_sizes();
    std::vector<double> mean_distance(model.k, 0.0);
    for (std::size_t i = 0; i < model.assignments.size(); ++i) {
        const int c = model.assignments[i];
        mean_distance[c] += euclidean_distance(vectors[i], model.centroids[c]);
    }
    int best = -1;
    for (int c = 0; c < model.k; ++c) {
        if (sizes[c] == 0) continue;
        mean_distance[c] /= sizes[c];
        if (best < 0 || sizes[c] > sizes[best] || (sizes[c] == sizes[best] && mean_distance[c] < mean_distance[best]))
            best = c;
    }
    LargestCluster out;
    out.cluster_id = best;
    for (std::size_t i = 0; i < model.assignments.size(); ++i)
        if (model.assignments[i] == best) out.members.push_back(static_cast<int>(i));
    return out;
}

} // namespace reptex
