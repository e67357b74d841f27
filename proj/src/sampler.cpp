#include "reptex/sampler.hpp"

#include <optional>

#include "reptex/parallel.hpp"
#include "reptex/rng.hpp"

namespace reptex {

void SamplerConfig::validate() const {
    if (sample_count < 1) throw Error(Errc::InvalidConfig, "samples must be >= 1");
    if (min_side < 1 || min_side > max_side) throw Error(Errc::InvalidConfig, "require 1 <= min_side <= max_side");
    if (!(coverage_threshold > 0.0 && coverage_threshold <= 1.0))
        throw Error(Errc::InvalidConfig, "coverage must lie in (0, 1]");
    if (max_attempts < sample_count) throw Error(Errc::InvalidConfig, "max_attempts must be >= samples");
}

MaskIntegral::MaskIntegral(const MaskRaster& mask)
    : width_(mask.width()), sums_(static_cast<std::size_t>(mask.width() + 1) * (mask.height() + 1), 0) {
    const std::size_t stride = static_cast<std::size_t>(width_) + 1;
    for (int y = 0; y < mask.height(); ++y) {
        std::int64_t row = 0;
        for (int x = 0; x < width_; ++x) {
            row += mask.at(x, y) ? 1 : 0;
            sums_[(y + 1) * stride + x + 1] = sums_[y * stride + x + 1] + row;
        }
    }
}

std::int64_t MaskIntegral::count(const Rect& r) const noexcept {
    const std::size_t stride = static_cast<std::size_t>(width_) + 1;
    const auto at = [&](int x, int y) { return sums_[static_cast<std::size_t>(y) * stride + x]; };
    return at(r.x + r.w, r.y + r.h) - at(r.x, r.y + r.h) - at(r.x + r.w, r.y) + at(r.x, r.y);
}

double coverage_fraction(const MaskRaster& mask, int x, int y, int side) {
    if (side < 1 || x < 0 || y < 0 || x + side > mask.width() || y + side > mask.height())
        throw Error(Errc::OutOfBounds, "coverage window leaves the mask");
    std::int64_t hits = 0;
    for (int j = y; j < y + side; ++j)
        for (int i = x; i < x + side; ++i) hits += mask.at(i, j) ? 1 : 0;
    return static_cast<double>(hits) / (static_cast<double>(side) * side);
}

namespace {

struct Attempt {
    Pixel center;
    int side = 0;
    double coverage = 0.0;
};

} // namespace

std::vector<Candidate> sample_candidates(const RasterImage& img, const MaskRaster& mask, const SamplerConfig& cfg,
                                         int subarea_id, int workers) {
    cfg.validate();
    if (img.width() != mask.width() || img.height() != mask.height())
        throw Error(Errc::DimensionMismatch, "image and mask dimensions differ");

    std::vector<Pixel> pool;
    pool.reserve(mask.count());
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (mask.at(x, y)) pool.push_back({x, y});
    if (pool.empty()) throw Error(Errc::MaskEmpty, "mask has no true pixels");

    const MaskIntegral integral(mask);
    const auto evaluate = [&](int attempt) -> std::optional<Attempt> {
        CounterRng rng(cfg.seed, static_cast<std::uint64_t>(attempt));
        const Pixel center = pool[rng.below(pool.size())];
        const int side = rng.uniform_int(cfg.min_side, cfg.max_side);
        const Rect r = centered_square(center, side);
        if (r.x < 0 || r.y < 0 || r.x + side > img.width() || r.y + side > img.height()) return std::nullopt;
        const double coverage = static_cast<double>(integral.count(r)) / (static_cast<double>(side) * side);
        if (coverage < cfg.coverage_threshold) return std::nullopt;
        return Attempt{center, side, coverage};
    };

    // Attempts are evaluated in fixed-size blocks (possibly concurrently) and
    // accepted strictly in attempt order, so the result equals a serial scan.
    constexpr int kBlock = 4096;
    std::vector<Candidate> out;
    out.reserve(cfg.sample_count);
    std::vector<std::optional<Attempt>> block;
    for (int start = 0; start < cfg.max_attempts && static_cast<int>(out.size()) < cfg.sample_count;
         start += kBlock) {
        const int n = std::min(kBlock, cfg.max_attempts - start);
        block.assign(n, std::nullopt);
        parallel_for(static_cast<std::size_t>(n), workers, [&](std::size_t i) { block[i] = evaluate(start + static_cast<int>(i)); });
        for (int i = 0; i < n && static_cast<int>(out.size()) < cfg.sample_count; ++i) {
            if (!block[i]) continue;
            Candidate c;
            c.index = static_cast<int>(out.size());
            c.center = block[i]->center;
            c.side = block[i]->side;
            c.subarea_id = subarea_id;
            c.mask_coverage = block[i]->coverage;
            out.push_back(std::move(c));
        }
    }

    const auto accepted = static_cast<double>(out.size());
    if (accepted < cfg.sample_count && accepted < 0.1 * cfg.max_attempts)
        throw Error(Errc::AcceptanceFloor, "accepted " + std::to_string(out.size()) + " crops in " +
                                               std::to_string(cfg.max_attempts) + " attempts");

    parallel_for(out.size(), workers, [&](std::size_t i) { out[i].patch = crop(img, out[i].rect()); });
    return out;
}

} // namespace reptex
