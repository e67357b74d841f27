#include "reptex/embedder.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>
#include <numbers>
#include <numeric>

#include "reptex/parallel.hpp"

namespace reptex {

double euclidean_distance(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.size() != b.size()) throw Error(Errc::DimensionMismatch, "embedding dimensions differ");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

void AugmentationSpec::validate() const {
    if (!(flip_prob >= 0.0 && flip_prob <= 1.0)) throw Error(Errc::InvalidConfig, "flip_prob must lie in [0, 1]");
    if (!(translate_max >= 0.0 && translate_max < 0.5))
        throw Error(Errc::InvalidConfig, "translate_max must lie in [0, 0.5)");
    if (!(scale_lo > 0.0 && scale_lo <= 1.0 && scale_hi >= 1.0))
        throw Error(Errc::InvalidConfig, "scale range must satisfy 0 < lo <= 1 <= hi");
    if (!(crop_jitter >= 0.0 && crop_jitter < 1.0)) throw Error(Errc::InvalidConfig, "crop_jitter must lie in [0, 1)");
}

void TrainingConfig::validate() const {
    if (canonical_size < 4 || canonical_size % 4 != 0)
        throw Error(Errc::InvalidConfig, "canonical_size must be a positive multiple of 4");
    if (epochs < 1 || batch_size < 1) throw Error(Errc::InvalidConfig, "epochs and batch_size must be >= 1");
    if (!(learning_rate > 0.0)) throw Error(Errc::InvalidConfig, "learning_rate must be positive");
    augmentation.validate();
}

namespace {

std::uint8_t to_channel(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

int mirror_index(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * n;
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - 1 - i;
}

// Bilinear sample at continuous (px, py) with mirrored borders.
std::array<double, 3> sample_mirror(const RasterImage& img, double px, double py) {
    const double fx0 = std::floor(px), fy0 = std::floor(py);
    const double fx = px - fx0, fy = py - fy0;
    const int x0 = static_cast<int>(fx0), y0 = static_cast<int>(fy0);
    const int xs[2] = {mirror_index(x0, img.width()), mirror_index(x0 + 1, img.width())};
    const int ys[2] = {mirror_index(y0, img.height()), mirror_index(y0 + 1, img.height())};
    const double wx[2] = {1.0 - fx, fx};
    const double wy[2] = {1.0 - fy, fy};
    std::array<double, 3> out{};
    for (int j = 0; j < 2; ++j) {
        for (int i = 0; i < 2; ++i) {
            const double w = wx[i] * wy[j];
            if (w == 0.0) continue;
            for (int c = 0; c < 3; ++c) out[c] += w * img.channel(xs[i], ys[j], c);
        }
    }
    return out;
}

RasterImage transform_patch(const RasterImage& patch, const AugmentationSpec& spec, CounterRng& rng) {
    const int side = patch.width();
    const int height = patch.height();
    // Every draw is taken unconditionally so the stream layout is fixed.
    const double u = rng.uniform(spec.scale_lo, spec.scale_hi);
    const double dx = rng.uniform(-spec.translate_max, spec.translate_max) * side;
    const double dy = rng.uniform(-spec.translate_max, spec.translate_max) * height;
    const bool flip = rng.bernoulli(spec.flip_prob);
    const double jitter = rng.uniform(0.0, spec.crop_jitter);
    const double ox = rng.uniform(0.0, 1.0) * jitter * side;
    const double oy = rng.uniform(0.0, 1.0) * jitter * height;

    const double wx = side * (1.0 - jitter), wy = height * (1.0 - jitter);
    const double cx = (side - 1) / 2.0, cy = (height - 1) / 2.0;
    RasterImage out(side, height);
    for (int qy = 0; qy < height; ++qy) {
        for (int qx = 0; qx < side; ++qx) {
            // Output pixel back to source, undoing each step in reverse order.
            double px = ox + (qx + 0.5) * wx / side - 0.5;
            double py = oy + (qy + 0.5) * wy / height - 0.5;
            if (flip) px = (side - 1) - px;
            px -= dx;
            py -= dy;
            px = cx + (px - cx) / u;
            py = cy + (py - cy) / u;
            const auto v = sample_mirror(patch, px, py);
            out.set(qx, qy, {to_channel(v[0]), to_channel(v[1]), to_channel(v[2])});
        }
    }
    return out;
}

using MatF = nn::ConvAutoencoder<float>::Mat;

// Writes a canonical image into column block `slot` of a (3, n*S²) matrix.
void load_block(const RasterImage& canonical, MatF& m, int slot) {
    const int s = canonical.width();
    const auto ch = canonical.channels();
    float* dst = m.data() + static_cast<std::size_t>(slot) * s * s * 3;
    for (std::size_t i = 0; i < ch.size(); ++i) dst[i] = ch[i] / 255.0f;
}

void check_patch(const RasterImage& patch) {
    if (patch.empty()) throw Error(Errc::ZeroDimension, "empty patch");
}

} // namespace

RasterImage canonicalize(const RasterImage& patch, int canonical_size) {
    check_patch(patch);
    return resize_bilinear(patch, canonical_size, canonical_size);
}

AugmentedPair make_augmented_pair(const RasterImage& patch, const AugmentationSpec& spec, CounterRng& rng,
                                  int canonical_size) {
    check_patch(patch);
    spec.validate();
    return {canonicalize(transform_patch(patch, spec, rng), canonical_size), canonicalize(patch, canonical_size)};
}

EmbedderModel train_autoencoder(std::span<const Candidate> candidates, const TrainingConfig& cfg,
                                std::uint64_t seed) {
    std::vector<RasterImage> patches;
    patches.reserve(candidates.size());
    for (const Candidate& c : candidates) patches.push_back(c.patch);
    return train_autoencoder(std::span<const RasterImage>(patches), cfg, seed);
}

EmbedderModel train_autoencoder(std::span<const RasterImage> patches, const TrainingConfig& cfg,
                                std::uint64_t seed) {
    cfg.validate();
    if (static_cast<int>(patches.size()) < cfg.min_candidates)
        throw Error(Errc::TooFewCandidates, "need at least " + std::to_string(cfg.min_candidates) +
                                                " candidates to train, got " + std::to_string(patches.size()));

    EmbedderModel model;
    model.kind = EmbedderKind::Autoencoder;
    model.architecture.input_size = cfg.canonical_size;
    auto params = nn::initial_parameters<float>(model.architecture, seed);

    const int S = cfg.canonical_size;
    const int n = static_cast<int>(patches.size());
    const std::size_t block = static_cast<std::size_t>(S) * S;

    MatF originals(3, static_cast<Eigen::Index>(n) * block);
    for (int i = 0; i < n; ++i) load_block(canonicalize(patches[i], S), originals, i);

    nn::ConvAutoencoder<float> net(model.architecture);
    nn::Adam<float> optimizer(params.size(), cfg.learning_rate);
    nn::Params<float> grad;
    std::vector<int> order(n);
    MatF input, target;
    bool first = true;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), 0);
        CounterRng shuffle(seed, derive_seed(tag_of("shuffle"), static_cast<std::uint64_t>(epoch)));
        for (int i = n - 1; i > 0; --i) std::swap(order[i], order[shuffle.below(static_cast<std::uint64_t>(i) + 1)]);

        const std::uint64_t epoch_seed = derive_seed(seed, derive_seed(tag_of("augment"), static_cast<std::uint64_t>(epoch)));
        double loss_sum = 0.0;
        for (int start = 0; start < n; start += cfg.batch_size) {
            const int b = std::min(cfg.batch_size, n - start);
            input.resize(3, static_cast<Eigen::Index>(b) * block);
            target.resize(3, static_cast<Eigen::Index>(b) * block);
            for (int j = 0; j < b; ++j) {
                const int idx = order[start + j];
                CounterRng rng(epoch_seed, static_cast<std::uint64_t>(idx));
                load_block(canonicalize(transform_patch(patches[idx], cfg.augmentation, rng), S), input, j);
                target.middleCols(static_cast<Eigen::Index>(j) * block, block) =
                    originals.middleCols(static_cast<Eigen::Index>(idx) * block, block);
            }
            net.reconstruct(params, input, b);
            const double loss = net.loss(target);
            if (!std::isfinite(loss))
                throw Error(Errc::DivergedTraining, "non-finite loss at epoch " + std::to_string(epoch));
            if (first) {
                model.initial_loss = loss;
                first = false;
            }
            loss_sum += loss * b;
            net.backward(params, target, b, grad);
            optimizer.step(params, grad);
        }
        model.epoch_losses.push_back(loss_sum / n);
    }
    for (float p : params)
        if (!std::isfinite(p)) throw Error(Errc::DivergedTraining, "non-finite parameter after training");

    model.parameters = std::move(params);
    model.trained = true;
    return model;
}

namespace {

void require_ready(const EmbedderModel& model) {
    if (model.kind == EmbedderKind::Autoencoder &&
        (!model.trained || model.parameters.size() != nn::parameter_count(model.architecture)))
        throw Error(Errc::UntrainedModel, "autoencoder has no trained parameters");
}

std::vector<EmbeddingVector> encode_chunk(const EmbedderModel& model, std::span<const RasterImage> patches) {
    const int S = model.canonical_size();
    const int b = static_cast<int>(patches.size());
    MatF input(3, static_cast<Eigen::Index>(b) * S * S);
    for (int j = 0; j < b; ++j) load_block(canonicalize(patches[j], S), input, j);
    nn::ConvAutoencoder<float> net(model.architecture);
    const MatF codes = net.encode(model.parameters, input, b);
    std::vector<EmbeddingVector> out(b);
    for (int j = 0; j < b; ++j) {
        out[j].values.resize(codes.rows());
        for (Eigen::Index r = 0; r < codes.rows(); ++r) out[j].values[r] = codes(r, j);
    }
    return out;
}

} // namespace

EmbeddingVector embed(const EmbedderModel& model, const RasterImage& patch) {
    check_patch(patch);
    require_ready(model);
    if (model.kind == EmbedderKind::Descriptor) return descriptor_embed(patch);
    return encode_chunk(model, std::span<const RasterImage>(&patch, 1)).front();
}

std::vector<EmbeddingVector> embed_all(const EmbedderModel& model, std::span<const RasterImage> patches,
                                       int workers) {
    require_ready(model);
    std::vector<EmbeddingVector> out(patches.size());
    if (model.kind == EmbedderKind::Descriptor) {
        parallel_for(patches.size(), workers, [&](std::size_t i) { out[i] = descriptor_embed(patches[i]); });
        return out;
    }
    constexpr std::size_t kChunk = 64;
    const std::size_t chunks = (patches.size() + kChunk - 1) / kChunk;
    parallel_for(chunks, workers, [&](std::size_t c) {
        const std::size_t begin = c * kChunk;
        const std::size_t len = std::min(kChunk, patches.size() - begin);
        auto codes = encode_chunk(model, patches.subspan(begin, len));
        std::move(codes.begin(), codes.end(), out.begin() + static_cast<std::ptrdiff_t>(begin));
    });
    return out;
}

std::vector<EmbeddingVector> embed_candidates(const EmbedderModel& model, std::span<const Candidate> candidates,
                                              int workers) {
    std::vector<RasterImage> patches;
    patches.reserve(candidates.size());
    for (const Candidate& c : candidates) patches.push_back(c.patch);
    return embed_all(model, patches, workers);
}

EmbeddingVector descriptor_embed(const RasterImage& patch) {
    check_patch(patch);
    const int w = patch.width(), h = patch.height();
    const double n = static_cast<double>(w) * h;
    const GrayRaster gray = to_grayscale(patch);
    EmbeddingVector out;
    out.values.assign(64, 0.0);
    double* lum_hist = out.values.data();
    double* chan_hist = lum_hist + 16;
    double* spectrum = chan_hist + 24;
    double* glcm_stats = spectrum + 16;

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            lum_hist[std::min(15, static_cast<int>(gray.at(x, y) * 16.0))] += 1.0;
            for (int c = 0; c < 3; ++c) chan_hist[c * 8 + patch.channel(x, y, c) / 32] += 1.0;
        }
    }
    for (int i = 0; i < 40; ++i) lum_hist[i] /= n;

    // Separable DFT of the luminance: rows first, then columns.
    using cd = std::complex<double>;
    const auto twiddles = [](int len) {
        std::vector<cd> t(len);
        for (int k = 0; k < len; ++k) t[k] = std::polar(1.0, -2.0 * std::numbers::pi * k / len);
        return t;
    };
    const auto tw_x = twiddles(w), tw_y = twiddles(h);
    std::vector<cd> rows(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y)
        for (int u = 0; u < w; ++u) {
            cd acc = 0.0;
            for (int x = 0; x < w; ++x)
                acc += gray.at(x, y) * tw_x[(u * x) % w];
            rows[static_cast<std::size_t>(y) * w + u] = acc;
        }
    std::array<double, 16> bin_sum{};
    std::array<int, 16> bin_count{};
    const double r_max = std::sqrt(0.5);
    for (int v = 0; v < h; ++v) {
        for (int u = 0; u < w; ++u) {
            cd acc = 0.0;
            for (int y = 0; y < h; ++y)
                acc += rows[static_cast<std::size_t>(y) * w + u] * tw_y[(v * y) % h];
            int bin = 0;
            if (u != 0 || v != 0) {
                const double fu = static_cast<double>(std::min(u, w - u)) / w;
                const double fv = static_cast<double>(std::min(v, h - v)) / h;
                bin = 1 + std::min(14, static_cast<int>(std::hypot(fu, fv) / r_max * 15.0));
            }
            bin_sum[bin] += std::abs(acc);
            ++bin_count[bin];
        }
    }
    double spectrum_total = 0.0;
    for (int b = 0; b < 16; ++b) {
        spectrum[b] = bin_count[b] ? bin_sum[b] / bin_count[b] : 0.0;
        // Round-off leaves ~1e-15 magnitudes where the exact answer is zero.
        if (spectrum[b] < 1e-9 * (bin_sum[0] + 1e-300)) spectrum[b] = 0.0;
        spectrum_total += spectrum[b];
    }
    if (spectrum_total > 0.0)
        for (int b = 0; b < 16; ++b) spectrum[b] /= spectrum_total;

    // Gray-level co-occurrence over right and down neighbours, symmetric.
    constexpr int L = 8;
    std::array<double, L * L> P{};
    double pairs = 0.0;
    const auto level = [&](int x, int y) { return std::min(L - 1, static_cast<int>(gray.at(x, y) * L)); };
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int a = level(x, y);
            if (x + 1 < w) {
                const int b = level(x + 1, y);
                P[a * L + b] += 1;
                P[b * L + a] += 1;
                pairs += 2;
            }
            if (y + 1 < h) {
                const int b = level(x, y + 1);
                P[a * L + b] += 1;
                P[b * L + a] += 1;
                pairs += 2;
            }
        }
    }
    if (pairs > 0) {
        double contrast = 0, dissimilarity = 0, homogeneity = 0, energy = 0, entropy = 0, mean = 0;
        for (int i = 0; i < L; ++i)
            for (int j = 0; j < L; ++j) {
                const double p = P[i * L + j] / pairs;
                contrast += (i - j) * (i - j) * p;
                dissimilarity += std::abs(i - j) * p;
                homogeneity += p / (1.0 + (i - j) * (i - j));
                energy += p * p;
                if (p > 0) entropy -= p * std::log(p);
                mean += i * p;
            }
        double variance = 0, covariance = 0;
        for (int i = 0; i < L; ++i)
            for (int j = 0; j < L; ++j) {
                const double p = P[i * L + j] / pairs;
                variance += (i - mean) * (i - mean) * p;
                covariance += (i - mean) * (j - mean) * p;
            }
        const double correlation = variance > 1e-12 ? covariance / variance : 0.0;
        const double stats[8] = {contrast / ((L - 1) * (L - 1)), dissimilarity / (L - 1), homogeneity, energy,
                                 entropy / std::log(L * L), (correlation + 1.0) / 2.0, mean / (L - 1),
                                 variance / ((L - 1) * (L - 1))};
        double norm = 0;
        for (double s : stats) norm += s * s;
        norm = std::sqrt(norm);
        for (int k = 0; k < 8; ++k) glcm_stats[k] = norm > 0 ? stats[k] / norm : 0.0;
    }
    return out;
}

double translate_invariance_fraction(const EmbedderModel& model, std::span<const RasterImage> patches,
                                     std::span<const RasterImage> translated, int workers) {
    if (patches.size() != translated.size() || patches.size() < 2)
        throw Error(Errc::DimensionMismatch, "need at least two aligned patch/translate pairs");
    const auto base = embed_all(model, patches, workers);
    const auto moved = embed_all(model, translated, workers);
    std::vector<double> pairwise;
    pairwise.reserve(base.size() * (base.size() - 1) / 2);
    for (std::size_t i = 0; i < base.size(); ++i)
        for (std::size_t j = i + 1; j < base.size(); ++j) pairwise.push_back(euclidean_distance(base[i], base[j]));
    const auto mid = pairwise.begin() + static_cast<std::ptrdiff_t>(pairwise.size() / 2);
    std::nth_element(pairwise.begin(), mid, pairwise.end());
    double median = *mid;
    if (pairwise.size() % 2 == 0) median = (median + *std::max_element(pairwise.begin(), mid)) / 2.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < base.size(); ++i)
        if (euclidean_distance(base[i], moved[i]) < median) ++hits;
    return static_cast<double>(hits) / static_cast<double>(base.size());
}

namespace {

constexpr char kMagic[4] = {'R', 'T', 'X', 'M'};
constexpr std::uint32_t kFormatVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw Error(Errc::UnsupportedFormat, "truncated model file");
    return std::uint32_t{b[0]} | (std::uint32_t{b[1]} << 8) | (std::uint32_t{b[2]} << 16) | (std::uint32_t{b[3]} << 24);
}

} // namespace

void save_model(const EmbedderModel& model, const std::filesystem::path& path) {
    require_ready(model);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::UnwritableOutput, "cannot open " + path.string());
    out.write(kMagic, 4);
    put_u32(out, kFormatVersion);
    put_u32(out, static_cast<std::uint32_t>(model.kind));
    const nn::Architecture& a = model.architecture;
    put_u32(out, static_cast<std::uint32_t>(model.canonical_size()));
    put_u32(out, static_cast<std::uint32_t>(model.embed_dim()));
    const bool has_layers = model.kind == EmbedderKind::Autoencoder;
    const auto shapes = has_layers ? nn::layer_shapes(a) : std::vector<nn::LayerShape>{};
    put_u32(out, static_cast<std::uint32_t>(shapes.size()));
    for (const auto& l : shapes) {
        put_u32(out, static_cast<std::uint32_t>(l.rows));
        put_u32(out, static_cast<std::uint32_t>(l.cols));
        put_u32(out, static_cast<std::uint32_t>(l.bias_size));
    }
    put_u32(out, static_cast<std::uint32_t>(model.parameters.size()));
    for (float p : model.parameters) put_u32(out, std::bit_cast<std::uint32_t>(p));
    if (!out) throw Error(Errc::UnwritableOutput, "short write to " + path.string());
}

EmbedderModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::UnreadableFile, "cannot open " + path.string());
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        throw Error(Errc::UnsupportedFormat, path.string() + " is not a model file");
    if (get_u32(in) != kFormatVersion) throw Error(Errc::UnsupportedFormat, "unknown model format version");
    EmbedderModel model;
    const std::uint32_t kind = get_u32(in);
    if (kind > 1) throw Error(Errc::UnsupportedFormat, "unknown embedder kind");
    model.kind = static_cast<EmbedderKind>(kind);
    model.architecture.input_size = static_cast<int>(get_u32(in));
    model.architecture.embed_dim = static_cast<int>(get_u32(in));
    const std::uint32_t layers = get_u32(in);
    std::vector<std::array<std::uint32_t, 3>> stored(layers);
    for (auto& s : stored)
        for (auto& v : s) v = get_u32(in);
    if (model.kind == EmbedderKind::Autoencoder) {
        // Channel widths are the fixed architecture; only the sizes vary.
        const auto expected = nn::layer_shapes(model.architecture);
        bool ok = stored.size() == expected.size();
        for (std::size_t i = 0; ok && i < stored.size(); ++i)
            ok = stored[i][0] == static_cast<std::uint32_t>(expected[i].rows) &&
                 stored[i][1] == static_cast<std::uint32_t>(expected[i].cols) &&
                 stored[i][2] == static_cast<std::uint32_t>(expected[i].bias_size);
        if (!ok) throw Error(Errc::UnsupportedFormat, "layer shapes do not match the autoencoder layout");
    }
    const std::uint32_t count = get_u32(in);
    model.parameters.resize(count);
    for (auto& p : model.parameters) p = std::bit_cast<float>(get_u32(in));
    if (model.kind == EmbedderKind::Autoencoder && count != nn::parameter_count(model.architecture))
        throw Error(Errc::UnsupportedFormat, "parameter count does not match layer shapes");
    model.trained = true;
    return model;
}

} // namespace reptex
