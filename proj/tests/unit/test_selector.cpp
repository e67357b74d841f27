#include <doctest.h>

#include <random>

#include "reptex/selector.hpp"

using namespace reptex;

namespace {

Candidate make_candidate(int index, int side, Rgb fill = {90, 90, 90}) {
    Candidate c;
    c.index = index;
    c.side = side;
    c.center = {100, 100};
    c.patch = RasterImage(side, side, fill);
    c.mask_coverage = 1.0;
    return c;
}

ClusterModel single_cluster(std::span<const EmbeddingVector> v) {
    ClusterModel m;
    m.k = 1;
    m.assignments.assign(v.size(), 0);
    EmbeddingVector c{std::vector<double>(v.front().values.size(), 0.0)};
    for (const auto& e : v)
        for (std::size_t d = 0; d < c.values.size(); ++d) c.values[d] += e.values[d] / static_cast<double>(v.size());
    m.centroids = {c};
    return m;
}

} // namespace

TEST_SUITE("selector") {

TEST_CASE("center distances") {
    const EmbeddingVector origin{std::vector<double>(64, 0.0)};
    EmbeddingVector r = origin;
    r.values[0] = 3;
    r.values[1] = 4;
    const std::vector<EmbeddingVector> v{origin, r};
    const auto d = center_distances(v, origin);
    CHECK(d[0] == 0.0);
    CHECK(d[1] == 5.0);

    std::mt19937_64 gen(1);
    std::normal_distribution<double> n;
    std::vector<EmbeddingVector> rnd(20, EmbeddingVector{std::vector<double>(64)});
    EmbeddingVector c{std::vector<double>(64)};
    for (double& x : c.values) x = n(gen);
    for (auto& e : rnd)
        for (double& x : e.values) x = n(gen);
    const auto got = center_distances(rnd, c);
    for (std::size_t i = 0; i < rnd.size(); ++i) {
        long double s = 0;
        for (int k = 0; k < 64; ++k) s += (rnd[i].values[k] - c.values[k]) * (rnd[i].values[k] - c.values[k]);
        CHECK(std::abs(got[i] - static_cast<double>(std::sqrt(s))) <= 1e-12);
    }
}

TEST_CASE("width factor") {
    CHECK(width_factor(48, 48) == 1.0 / 48.0);
    CHECK(width_factor(16, 16) == 0.0625);
    CHECK(width_factor(1, 1) == 1.0);
    CHECK(width_factor(make_candidate(0, 48)) == 1.0 / 48.0);
}

TEST_CASE("boundary factor") {
    CHECK(boundary_factor(to_grayscale(RasterImage(7, 7, Rgb{40, 80, 120}))) == 1.0);
    CHECK(boundary_factor(GrayRaster(2, 2, {1, 1, 2, 2})) == 1.0);
    const GrayRaster diag(2, 2, {1, 0, 1, 1});
    const auto [rows, cols] = boundary_cosines(diag);
    CHECK(rows == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK(cols == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK(boundary_factor(diag) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    // Orthogonal boundaries clamp instead of dividing by zero.
    CHECK(boundary_factor(GrayRaster(2, 2, {1, 0, 0, 1})) == doctest::Approx(1.0 / kBoundaryCosineFloor));
    CHECK_THROWS_AS(boundary_factor(GrayRaster(1, 3, {1, 1, 1})), Error);
}

TEST_CASE("weight and weighted distance") {
    CHECK(weight(1.0, 1.0) == 1.0);
    CHECK(weight(1.0 / 48, 1.0) == 1.0 / 48);
    CHECK(weight(0.0625, std::sqrt(2.0)) == doctest::Approx(0.0883883).epsilon(1e-6));
    CHECK(weighted_distance(0.0, 123.0) == 0.0);
    CHECK(weighted_distance(2.0, 0.5) == 1.0);

    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0.01, 5.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> d(12), v(12), w(12), scaled(12);
        std::vector<int> keys(12);
        for (int i = 0; i < 12; ++i) {
            d[i] = u(gen);
            v[i] = u(gen);
            keys[i] = i;
        }
        const double k = u(gen) * 10;
        for (int i = 0; i < 12; ++i) {
            w[i] = weighted_distance(d[i], v[i]);
            scaled[i] = weighted_distance(d[i], v[i] * k);
        }
        CHECK(argmin_by_key(w, keys) == argmin_by_key(scaled, keys));
    }
}

TEST_CASE("argmin ties go to the smaller key") {
    const std::vector<double> v{2.0, 1.0, 1.0};
    CHECK(argmin_by_key(v, std::vector<int>{0, 9, 4}) == 2);
    CHECK(argmin_by_key(v, std::vector<int>{0, 4, 9}) == 1);
}

TEST_CASE("select") {
    SUBCASE("one member") {
        const std::vector<Candidate> c{make_candidate(7, 20)};
        const std::vector<EmbeddingVector> e{{{1.0, 2.0}}};
        const auto r = select(c, e, single_cluster(e));
        CHECK(r.chosen_plain == 7);
        CHECK(r.chosen_weighted == 7);
        CHECK(r.chosen_median == 7);
    }
    SUBCASE("equal D, sides 16 and 48: the wider one wins the weighted pick") {
        const std::vector<Candidate> c{make_candidate(0, 16), make_candidate(1, 48)};
        const std::vector<EmbeddingVector> e{{{-1.0, 0.0}}, {{1.0, 0.0}}};
        const auto r = select(c, e, single_cluster(e));
        CHECK(r.distances[0] == r.distances[1]);
        CHECK(r.chosen_weighted == 1);
        CHECK(r.chosen_plain == 0);
    }
    SUBCASE("coincident optimum and exact identities") {
        const std::vector<Candidate> c{make_candidate(0, 16), make_candidate(1, 40), make_candidate(2, 24),
                                       make_candidate(3, 30)};
        const std::vector<EmbeddingVector> e{{{3.0, 0.0}}, {{0.1, 0.0}}, {{-2.0, 0.5}}, {{-1.2, -0.5}}};
        const auto r = select(c, e, single_cluster(e));
        CHECK(r.chosen_plain == 1);
        CHECK(r.chosen_weighted == 1);
        for (std::size_t i = 0; i < r.member_indices.size(); ++i) {
            CHECK(r.weights[i] == r.width_factors[i] * r.boundary_factors[i]);
            CHECK(r.weighted_distances[i] == r.distances[i] * r.weights[i]);
        }
        // Lower median of four distances sorted ascending.
        std::vector<std::pair<double, int>> ranked;
        for (std::size_t i = 0; i < r.distances.size(); ++i) ranked.push_back({r.distances[i], r.member_indices[i]});
        std::sort(ranked.begin(), ranked.end());
        CHECK(r.chosen_median == ranked[1].second);
    }
}

}
