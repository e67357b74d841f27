#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "reptex/autoencoder.hpp"
#include "reptex/raster.hpp"
#include "reptex/rng.hpp"
#include "reptex/sampler.hpp"

namespace reptex {

struct EmbeddingVector {
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }
    double operator[](std::size_t i) const noexcept { return values[i]; }
};

double euclidean_distance(const EmbeddingVector& a, const EmbeddingVector& b);

/// Geometric augmentation parameters. No colour transforms exist by design
/// of the pairs: colour is part of what a texture means.
struct AugmentationSpec {
    double flip_prob = 0.5;
    double translate_max = 0.25;
    double scale_lo = 0.8;
    double scale_hi = 1.25;
    double crop_jitter = 0.1;

    static AugmentationSpec identity() { return {0.0, 0.0, 1.0, 1.0, 0.0}; }
    void validate() const;
};

struct AugmentedPair {
    RasterImage augmented;
    RasterImage original;
};

/// Bilinear resample to canonical_size² (pixel-centre aligned).
RasterImage canonicalize(const RasterImage& patch, int canonical_size);

/// Scale, translate (mirror padding), horizontal flip, crop jitter, in that
/// order; then both images are canonicalized.
AugmentedPair make_augmented_pair(const RasterImage& patch, const AugmentationSpec& spec, CounterRng& rng,
                                  int canonical_size = 32);

struct TrainingConfig {
    int canonical_size = 32;
    int epochs = 30;
    int batch_size = 64;
    double learning_rate = 1e-4;
    AugmentationSpec augmentation;
    int min_candidates = 32;

    void validate() const;
};

enum class EmbedderKind : std::uint32_t { Autoencoder = 0, Descriptor = 1 };

struct EmbedderModel {
    EmbedderKind kind = EmbedderKind::Descriptor;
    nn::Architecture architecture;
    nn::Params<float> parameters; // autoencoder only
    bool trained = false;
    std::vector<double> epoch_losses; // mean training loss per epoch
    double initial_loss = 0.0;        // loss on the first batch before any update

    int canonical_size() const noexcept { return architecture.input_size; }
    int embed_dim() const noexcept { return kind == EmbedderKind::Autoencoder ? architecture.embed_dim : 64; }

    static EmbedderModel descriptor() { return {}; }
};

/// Trains on augmented pairs built from the candidates' patches. Throws
/// TooFewCandidates, DivergedTraining.
EmbedderModel train_autoencoder(std::span<const Candidate> candidates, const TrainingConfig& cfg,
                                std::uint64_t seed);
EmbedderModel train_autoencoder(std::span<const RasterImage> patches, const TrainingConfig& cfg,
                                std::uint64_t seed);

/// Throws UntrainedModel for an autoencoder without parameters.
EmbeddingVector embed(const EmbedderModel& model, const RasterImage& patch);

/// Embeds many patches. Work is split in fixed chunks so results do not
/// depend on the worker count.
std::vector<EmbeddingVector> embed_all(const EmbedderModel& model, std::span<const RasterImage> patches,
                                       int workers = 1);
std::vector<EmbeddingVector> embed_candidates(const EmbedderModel& model, std::span<const Candidate> candidates,
                                              int workers = 1);

/// 64-d hand-made texture descriptor: 16-bin luminance histogram, 3x8-bin
/// channel histograms, 16 radial magnitude-spectrum bins, 8 co-occurrence
/// statistics.
EmbeddingVector descriptor_embed(const RasterImage& patch);

/// Fraction of pairs whose embedding distance falls below the median
/// pairwise distance of the first elements.
double translate_invariance_fraction(const EmbedderModel& model, std::span<const RasterImage> patches,
                                     std::span<const RasterImage> translated, int workers = 1);

void save_model(const EmbedderModel& model, const std::filesystem::path& path);
EmbedderModel load_model(const std::filesystem::path& path);

} // namespace reptex
