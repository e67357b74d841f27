#include "reptex/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "reptex/rng.hpp"

namespace reptex {

void SynthSpec::validate() const {
    if (tile.empty()) throw Error(Errc::InvalidConfig, "synthetic tile is empty");
    if (reps_x < 1 || reps_y < 1) throw Error(Errc::InvalidConfig, "tile repetitions must be >= 1");
    if (!(jitter_amp >= 0.0 && jitter_amp < 0.5)) throw Error(Errc::InvalidConfig, "jitter_amp must lie in [0, 0.5)");
    if (contamination) {
        if (contamination->count < 0 || contamination->block_size < 1 || contamination->fills.empty())
            throw Error(Errc::InvalidConfig, "invalid contamination settings");
    }
}

SynthImage generate_tiled_image(const SynthSpec& spec) {
    spec.validate();
    const int tw = spec.tile.width(), th = spec.tile.height();
    const int w = tw * spec.reps_x, h = th * spec.reps_y;
    SynthImage out{RasterImage(w, h), MaskRaster(w, h, true), MaskRaster(w, h, false), spec.tile};

    CounterRng jitter(spec.seed, tag_of("jitter"));
    const double amp = spec.jitter_amp * 255.0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const Rgb base = spec.tile.at(x % tw, y % th);
            if (amp == 0.0) {
                out.image.set(x, y, base);
                continue;
            }
            const auto shake = [&](std::uint8_t v) {
                const double noisy = v + jitter.uniform(-amp, amp);
                return static_cast<std::uint8_t>(std::clamp(std::lround(noisy), 0L, 255L));
            };
            const std::uint8_t r = shake(base.r);
            const std::uint8_t g = shake(base.g);
            const std::uint8_t b = shake(base.b);
            out.image.set(x, y, {r, g, b});
        }
    }

    if (spec.contamination && spec.contamination->count > 0) {
        const Contamination& c = *spec.contamination;
        if (c.block_size > w || c.block_size > h)
            throw Error(Errc::InvalidConfig, "contamination block larger than the image");
        CounterRng place(spec.seed, tag_of("contamination"));
        std::vector<Rect> blocks;
        const int max_tries = 10000 * c.count;
        for (int tries = 0; static_cast<int>(blocks.size()) < c.count; ++tries) {
            if (tries >= max_tries) throw Error(Errc::InvalidConfig, "cannot place contamination blocks without overlap");
            const Rect r{place.uniform_int(0, w - c.block_size), place.uniform_int(0, h - c.block_size), c.block_size,
                         c.block_size};
            const bool overlaps = std::any_of(blocks.begin(), blocks.end(), [&](const Rect& o) {
                return r.x < o.x + o.w && o.x < r.x + r.w && r.y < o.y + o.h && o.y < r.y + r.h;
            });
            if (!overlaps) blocks.push_back(r);
        }
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            const Rgb fill = c.fills[i % c.fills.size()];
            for (int y = blocks[i].y; y < blocks[i].y + blocks[i].h; ++y)
                for (int x = blocks[i].x; x < blocks[i].x + blocks[i].w; ++x) {
                    out.image.set(x, y, fill);
                    out.noise_mask.set(x, y, true);
                }
        }
    }
    return out;
}

RasterImage make_brick_tile(int size, std::uint64_t seed) {
    if (size < 8 || size % 4 != 0) throw Error(Errc::InvalidConfig, "brick tile size must be a multiple of 4, >= 8");
    CounterRng rng(seed, tag_of("bricks"));
    const int course = size / 2;
    const int brick = size / 2;
    // Shade of each of the four bricks (two per course).
    double shade[2][2];
    for (auto& row : shade)
        for (double& s : row) s = rng.uniform(-25.0, 25.0);

    const auto cyclic = [size](double d) {
        d = std::fmod(std::abs(d), static_cast<double>(size));
        return std::min(d, size - d);
    };
    RasterImage tile(size, size);
    for (int y = 0; y < size; ++y) {
        const int row = y / course;
        const double offset = row == 0 ? 0.0 : brick / 2.0;
        // Distance from the pixel centre to the nearest joint line.
        const double yc = y + 0.5;
        const double dy = std::min(cyclic(yc), cyclic(yc - course));
        for (int x = 0; x < size; ++x) {
            const double xc = x + 0.5;
            const double dx = std::min(cyclic(xc - offset), cyclic(xc - offset - brick));
            const double d = std::min(dx, dy);
            const double mortar = std::clamp(1.75 - d, 0.0, 1.0);
            const int col = static_cast<int>(std::floor(std::fmod(xc - offset + size, size) / brick)) % 2;
            const double s = shade[row][col] + 12.0 * std::sin(6.283185307179586 * (yc - row * course) / course);
            const double br = 175.0 + s, bg = 82.0 + 0.6 * s, bb = 60.0 + 0.4 * s;
            const double mr = 205.0, mg = 200.0, mb = 188.0;
            const auto mix = [&](double a, double b) {
                return static_cast<std::uint8_t>(std::clamp(std::lround(a * (1 - mortar) + b * mortar), 0L, 255L));
            };
            tile.set(x, y, {mix(br, mr), mix(bg, mg), mix(bb, mb)});
        }
    }
    return tile;
}

double ncc_score(const RasterImage& extracted, const RasterImage& truth_tile) {
    if (extracted.empty() || truth_tile.empty()) throw Error(Errc::ZeroDimension, "ncc needs non-empty images");
    const int w = truth_tile.width(), h = truth_tile.height();
    const GrayRaster e = to_grayscale(resize_bilinear(extracted, w, h));
    const GrayRaster t = to_grayscale(truth_tile);
    const auto centred = [](const GrayRaster& g, std::vector<double>& out) {
        const auto v = g.values();
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        out.resize(v.size());
        double norm = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            out[i] = v[i] - mean;
            norm += out[i] * out[i];
        }
        return std::sqrt(norm);
    };
    std::vector<double> ev, tv;
    const double en = centred(e, ev);
    const double tn = centred(t, tv);
    if (en < 1e-12 || tn < 1e-12) return 0.0;

    double best = -std::numeric_limits<double>::infinity();
    for (int sy = 0; sy < h; ++sy) {
        for (int sx = 0; sx < w; ++sx) {
            double acc = 0.0;
            for (int y = 0; y < h; ++y) {
                const double* erow = ev.data() + static_cast<std::size_t>(y) * w;
                const double* trow = tv.data() + static_cast<std::size_t>((y + sy) % h) * w;
                for (int x = 0; x < w; ++x) acc += erow[x] * trow[(x + sx) % w];
            }
            best = std::max(best, acc);
        }
    }
    return std::clamp(best / (en * tn), -1.0, 1.0);
}

double contamination_fraction(const Candidate& cand, const MaskRaster& noise_mask) {
    const Rect r = cand.rect();
    if (r.x < 0 || r.y < 0 || r.x + r.w > noise_mask.width() || r.y + r.h > noise_mask.height())
        throw Error(Errc::OutOfBounds, "candidate leaves the noise mask");
    std::size_t hits = 0;
    for (int y = r.y; y < r.y + r.h; ++y)
        for (int x = r.x; x < r.x + r.w; ++x) hits += noise_mask.at(x, y) ? 1 : 0;
    return static_cast<double>(hits) / (static_cast<double>(r.w) * r.h);
}

double boundary_similarity_percent(const Candidate& cand) {
    const auto [rows, cols] = boundary_cosines(to_grayscale(cand.patch));
    return 100.0 * (rows + cols) / 2.0;
}

CorpusStats corpus_stats(std::span<const SelectionResult> results,
                         std::span<const std::vector<Candidate>> candidates) {
    if (results.empty() || results.size() != candidates.size())
        throw Error(Errc::DimensionMismatch, "corpus needs one candidate list per result");
    const auto lookup = [](const std::vector<Candidate>& cands, int index) -> const Candidate& {
        for (const Candidate& c : cands)
            if (c.index == index) return c;
        throw Error(Errc::OutOfBounds, "chosen index " + std::to_string(index) + " not among the candidates");
    };
    CorpusStats s;
    s.images = results.size();
    for (std::size_t i = 0; i < results.size(); ++i) {
        const Candidate& plain = lookup(candidates[i], results[i].chosen_plain);
        const Candidate& weighted = lookup(candidates[i], results[i].chosen_weighted);
        s.plain_mean_side += plain.side;
        s.weighted_mean_side += weighted.side;
        s.plain_boundary_similarity += boundary_similarity_percent(plain);
        s.weighted_boundary_similarity += boundary_similarity_percent(weighted);
    }
    const double n = static_cast<double>(results.size());
    s.plain_mean_side /= n;
    s.weighted_mean_side /= n;
    s.plain_boundary_similarity /= n;
    s.weighted_boundary_similarity /= n;
    return s;
}

} // namespace reptex
