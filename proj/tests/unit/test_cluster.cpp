#include <doctest.h>

#include <map>
#include <random>

#include "oracles.hpp"
#include "reptex/cluster.hpp"

using namespace reptex;

namespace {

std::vector<EmbeddingVector> to_vectors(const std::vector<oracle::Point>& pts) {
    std::vector<EmbeddingVector> out;
    for (const auto& p : pts) out.push_back({p});
    return out;
}

std::vector<oracle::Point> blobs(int per_blob, std::uint64_t seed, std::vector<int>* labels, double spread = 0.3) {
    const std::vector<oracle::Point> centres{{0, 0, 0}, {20, 0, 5}, {0, 20, -5}};
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> n(0.0, spread);
    std::vector<oracle::Point> pts;
    for (int b = 0; b < 3; ++b)
        for (int i = 0; i < per_blob; ++i) {
            oracle::Point p = centres[b];
            for (double& v : p) v += n(gen);
            pts.push_back(p);
            if (labels) labels->push_back(b);
        }
    return pts;
}

double sq(const EmbeddingVector& a, const EmbeddingVector& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.values.size(); ++i) s += (a.values[i] - b.values[i]) * (a.values[i] - b.values[i]);
    return s;
}

} // namespace

TEST_SUITE("cluster") {

TEST_CASE("four-point example") {
    const auto v = to_vectors({{0, 0}, {0, 1}, {10, 0}, {10, 1}});
    const ClusterModel m = kmeans(v, 2, 1);
    CHECK(m.assignments[0] == m.assignments[1]);
    CHECK(m.assignments[2] == m.assignments[3]);
    CHECK(m.assignments[0] != m.assignments[2]);
    const auto& left = m.centroids[m.assignments[0]].values;
    const auto& right = m.centroids[m.assignments[2]].values;
    CHECK(left == std::vector<double>{0.0, 0.5});
    CHECK(right == std::vector<double>{10.0, 0.5});
    CHECK(davies_bouldin(v, m) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(m.dbi == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("one point per cluster") {
    const auto v = to_vectors({{0, 0}, {3, 1}, {7, 7}, {-2, 5}});
    const ClusterModel m = kmeans(v, 4, 2);
    CHECK(m.inertia == 0.0);
    CHECK(davies_bouldin(v, m) == 0.0);
}

TEST_CASE("three gaussian blobs are recovered") {
    std::vector<int> labels;
    const auto pts = blobs(67, 8, &labels, 1.0);
    const auto v = to_vectors(pts);
    const ClusterModel m = kmeans(v, 3, 5);
    // Majority vote maps each cluster to a blob.
    std::map<std::pair<int, int>, int> votes;
    for (std::size_t i = 0; i < v.size(); ++i) votes[{m.assignments[i], labels[i]}]++;
    std::map<int, int> best;
    for (int c = 0; c < 3; ++c) {
        int arg = 0, top = -1;
        for (int b = 0; b < 3; ++b)
            if (votes[{c, b}] > top) top = votes[{c, b}], arg = b;
        best[c] = arg;
    }
    int agree = 0;
    for (std::size_t i = 0; i < v.size(); ++i) agree += best[m.assignments[i]] == labels[i];
    CHECK(agree >= 0.95 * static_cast<double>(v.size()));
}

TEST_CASE("davies-bouldin matches the brute-force definition") {
    std::mt19937_64 gen(21);
    for (int trial = 0; trial < 100; ++trial) {
        const int k = 2 + static_cast<int>(gen() % 3);
        const int n = k + static_cast<int>(gen() % (51 - k));
        const int dim = 1 + static_cast<int>(gen() % 4);
        std::uniform_real_distribution<double> u(-5, 5);
        std::vector<oracle::Point> pts(n, oracle::Point(dim));
        for (auto& p : pts)
            for (double& x : p) x = u(gen);
        const auto v = to_vectors(pts);
        const ClusterModel m = kmeans(v, k, gen());
        CHECK(davies_bouldin(v, m) == doctest::Approx(oracle::davies_bouldin(pts, m.assignments, k)).epsilon(1e-9));
    }
}

TEST_CASE("lloyd invariants: monotone inertia and nearest-centroid assignment") {
    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 10 + static_cast<int>(gen() % 80);
        const int k = 2 + static_cast<int>(gen() % 5);
        std::normal_distribution<double> nd(0.0, 3.0);
        std::vector<oracle::Point> pts(n, oracle::Point(3));
        for (auto& p : pts)
            for (double& x : p) x = nd(gen);
        const auto v = to_vectors(pts);
        const ClusterModel m = kmeans(v, k, gen());
        for (std::size_t i = 1; i < m.inertia_history.size(); ++i)
            CHECK(m.inertia_history[i] <= m.inertia_history[i - 1] + 1e-9);
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double own = sq(v[i], m.centroids[m.assignments[i]]);
            for (int c = 0; c < k; ++c) CHECK(own <= sq(v[i], m.centroids[c]) + 1e-12);
        }
        const auto sizes = m.cluster_sizes();
        for (int s : sizes) CHECK(s > 0);
    }
}

TEST_CASE("errors") {
    const auto v = to_vectors({{0.0}, {1.0}});
    try {
        kmeans(v, 3, 1);
        FAIL("expected TooFewVectors");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::TooFewVectors);
    }
    CHECK_THROWS_AS(kmeans(v, 1, 1), Error);

    ClusterModel dup;
    dup.k = 2;
    dup.assignments = {0, 1};
    dup.centroids = {{{0.0}}, {{0.0}}};
    try {
        davies_bouldin(to_vectors({{0.0}, {0.0}}), dup);
        FAIL("expected DuplicateCentroids");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::DuplicateCentroids);
    }
}

TEST_CASE("select_k") {
    const auto v = to_vectors(blobs(30, 3, nullptr, 0.05));
    const std::vector<int> ks{3, 4, 5, 6};
    const KSelection s = select_k(v, ks, 9);
    CHECK(s.model.k == 3);
    REQUIRE(s.scores.size() == 4);
    for (std::size_t i = 0; i < ks.size(); ++i) CHECK(s.scores[i].k == ks[i]);
    for (const KScore& sc : s.scores) CHECK(s.model.dbi <= sc.dbi);

    const std::vector<int> only{3};
    CHECK(select_k(v, only, 1).model.k == 3);

    const KSelection again = select_k(v, ks, 9, {}, 3);
    CHECK(again.model.assignments == s.model.assignments);
    CHECK(again.model.dbi == s.model.dbi);
}

TEST_CASE("largest cluster tie rules") {
    SUBCASE("sizes 7, 2, 1") {
        ClusterModel m;
        m.k = 3;
        m.assignments = {0, 0, 0, 0, 0, 0, 0, 1, 1, 2};
        std::vector<EmbeddingVector> v(10, EmbeddingVector{{0.0}});
        m.centroids = {{{0.0}}, {{1.0}}, {{2.0}}};
        const LargestCluster l = largest_cluster(v, m);
        CHECK(l.cluster_id == 0);
        CHECK(l.members == std::vector<int>{0, 1, 2, 3, 4, 5, 6});
    }
    SUBCASE("equal sizes: smaller scatter wins") {
        ClusterModel m;
        m.k = 2;
        m.assignments = {0, 0, 1, 1};
        m.centroids = {{{0.0}}, {{10.0}}};
        const auto v = to_vectors({{0.9}, {-0.9}, {10.2}, {9.8}});
        CHECK(largest_cluster(v, m).cluster_id == 1);
    }
    SUBCASE("full tie: cluster 0") {
        ClusterModel m;
        m.k = 2;
        m.assignments = {1, 1, 0, 0};
        m.centroids = {{{10.0}}, {{0.0}}};
        const auto v = to_vectors({{0.5}, {-0.5}, {10.5}, {9.5}});
        CHECK(largest_cluster(v, m).cluster_id == 0);
    }
}

}
