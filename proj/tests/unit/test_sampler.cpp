#include <doctest.h>

#include "reptex/sampler.hpp"

using namespace reptex;

namespace {

RasterImage gradient(int w, int h) {
    RasterImage img(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            img.set(x, y, {static_cast<std::uint8_t>(x % 256), static_cast<std::uint8_t>(y % 256), 40});
    return img;
}

int brute_count(const MaskRaster& m, const Rect& r) {
    int n = 0;
    for (int y = r.y; y < r.y + r.h; ++y)
        for (int x = r.x; x < r.x + r.w; ++x) n += m.at(x, y);
    return n;
}

} // namespace

TEST_SUITE("sampler") {

TEST_CASE("all-true mask accepts every crop") {
    const RasterImage img = gradient(256, 256);
    SamplerConfig cfg;
    cfg.sample_count = 100;
    cfg.seed = 3;
    const auto cands = sample_candidates(img, MaskRaster(256, 256, true), cfg);
    REQUIRE(cands.size() == 100);
    for (std::size_t i = 0; i < cands.size(); ++i) {
        const Candidate& c = cands[i];
        const Rect r = c.rect();
        CHECK(c.index == static_cast<int>(i));
        CHECK(c.side >= 16);
        CHECK(c.side <= 48);
        CHECK(r.x >= 0);
        CHECK(r.y >= 0);
        CHECK(r.x + r.w <= 256);
        CHECK(r.y + r.h <= 256);
        CHECK(c.mask_coverage == 1.0);
        CHECK(c.patch == crop(img, r));
    }
}

TEST_CASE("all-false mask") {
    SamplerConfig cfg;
    cfg.sample_count = 10;
    try {
        sample_candidates(gradient(32, 32), MaskRaster(32, 32, false), cfg);
        FAIL("expected MaskEmpty");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::MaskEmpty);
    }
}

TEST_CASE("single 20x20 island: every candidate has at least 231 true pixels") {
    MaskRaster m(64, 64);
    for (int y = 20; y < 40; ++y)
        for (int x = 30; x < 50; ++x) m.set(x, y, true);
    SamplerConfig cfg;
    cfg.sample_count = 60;
    cfg.min_side = cfg.max_side = 16;
    cfg.seed = 9;
    const auto cands = sample_candidates(gradient(64, 64), m, cfg);
    REQUIRE(cands.size() == 60);
    for (const Candidate& c : cands) {
        CHECK(brute_count(m, c.rect()) >= 231);
        CHECK(c.mask_coverage == doctest::Approx(brute_count(m, c.rect()) / 256.0));
    }
}

TEST_CASE("acceptance floor") {
    // One true pixel in the corner: no 16-crop can reach 90% coverage.
    MaskRaster m(64, 64);
    m.set(0, 0, true);
    SamplerConfig cfg;
    cfg.sample_count = 10;
    cfg.max_attempts = 1000;
    try {
        sample_candidates(gradient(64, 64), m, cfg);
        FAIL("expected AcceptanceFloor");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::AcceptanceFloor);
    }
}

TEST_CASE("config validation") {
    SamplerConfig cfg;
    cfg.min_side = 50;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.coverage_threshold = 0.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.max_attempts = cfg.sample_count - 1;
    CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("coverage fraction") {
    MaskRaster m(8, 8);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 4; ++x) m.set(x, y, true);
    CHECK(coverage_fraction(m, 0, 0, 4) == 1.0);
    CHECK(coverage_fraction(m, 4, 4, 4) == 0.0);
    CHECK(coverage_fraction(m, 2, 2, 4) == 0.5);
    CHECK_THROWS_AS(coverage_fraction(m, 6, 6, 4), Error);
    const MaskIntegral integral(m);
    for (int y = 0; y + 3 <= 8; ++y)
        for (int x = 0; x + 3 <= 8; ++x) CHECK(integral.count({x, y, 3, 3}) == brute_count(m, {x, y, 3, 3}));
}

TEST_CASE("determinism and worker-count independence") {
    const RasterImage img = gradient(128, 96);
    MaskRaster m(128, 96, true);
    for (int y = 30; y < 60; ++y)
        for (int x = 0; x < 128; ++x) m.set(x, y, false);
    SamplerConfig cfg;
    cfg.sample_count = 300;
    cfg.seed = 42;
    const auto a = sample_candidates(img, m, cfg, 0, 1);
    const auto b = sample_candidates(img, m, cfg, 0, 4);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].center == b[i].center);
        CHECK(a[i].side == b[i].side);
        CHECK(a[i].patch == b[i].patch);
    }
    cfg.seed = 43;
    const auto c = sample_candidates(img, m, cfg);
    CHECK_FALSE((c[0].center == a[0].center && c[1].center == a[1].center && c[0].side == a[0].side));
}

TEST_CASE("centred square geometry") {
    CHECK(centered_square({10, 10}, 16) == Rect{2, 2, 16, 16});
    CHECK(centered_square({10, 10}, 17) == Rect{2, 2, 17, 17});
}

}
