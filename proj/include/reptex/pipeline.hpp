#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "reptex/cluster.hpp"
#include "reptex/embedder.hpp"
#include "reptex/evalkit.hpp"
#include "reptex/regions.hpp"
#include "reptex/sampler.hpp"
#include "reptex/selector.hpp"

namespace reptex {

enum class RegionMode { Labels, Mask, MaskFree };

const char* region_mode_name(RegionMode mode) noexcept;

struct PipelineConfig {
    std::filesystem::path image_path;
    std::optional<std::filesystem::path> labels_path;
    std::optional<std::filesystem::path> class_map_path;
    std::string background_class = "background";
    std::vector<std::string> separator_classes;
    std::optional<std::filesystem::path> mask_path;

    SamplerConfig sampler; // its seed is replaced by one derived from `seed`
    EmbedderKind embedder = EmbedderKind::Autoencoder;
    TrainingConfig training;
    std::optional<std::filesystem::path> model_path; // pre-trained autoencoder
    std::vector<int> k_set = {3, 4, 5, 6};
    KMeansOptions kmeans;
    std::uint64_t seed = 0;

    std::filesystem::path out_dir = ".";
    bool overlay = false;
    std::optional<std::pair<int, int>> tile_preview;
    std::optional<std::filesystem::path> eval_truth;
    bool save_models = false;
    bool report_timing = false; // wall-clock timings make the report non-reproducible
    int workers = 1;

    /// Labels win over a mask; neither means mask-free.
    RegionMode mode() const noexcept;
    /// Throws InvalidConfig.
    void validate() const;
};

struct SkippedRegion {
    int subarea_id = 0;
    std::size_t pixel_count = 0;
    std::string reason;
};

struct RegionResult {
    int subarea_id = 0;
    Rect bounding_box;
    std::size_t pixel_count = 0;
    std::vector<std::string> bordering_separators;
    MaskRaster mask;
    std::vector<Candidate> candidates;
    EmbedderModel model;
    KSelection clustering;
    SelectionResult selection;
    std::optional<double> ncc_plain;
    std::optional<double> ncc_weighted;
    std::map<std::string, double> timing_ms;

    const Candidate& candidate(int index) const { return candidates.at(static_cast<std::size_t>(index)); }
};

struct PipelineResult {
    RegionMode mode = RegionMode::MaskFree;
    int image_width = 0;
    int image_height = 0;
    std::vector<RegionResult> regions;
    std::vector<SkippedRegion> skipped;
    std::optional<CorpusStats> stats; // with a ground-truth tile
};

/// Where the background comes from, for in-memory use.
struct RegionSource {
    std::optional<MaskRaster> mask;
    std::optional<LabelRaster> labels;
};

/// Raised by extract(); names the pipeline stage that failed.
class StageError : public Error {
public:
    StageError(std::string stage, const Error& cause) : Error(cause), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

/// In-memory pipeline: regions -> sample -> embed -> select_k -> largest
/// cluster -> select, per region. Paths in `cfg` are ignored except model_path.
PipelineResult extract(const RasterImage& image, const RegionSource& source, const PipelineConfig& cfg,
                       const RasterImage* truth_tile = nullptr);

/// Loads inputs, runs extract(), writes textures, previews and report.json
/// into cfg.out_dir. Returns the process exit status: 0 success, 2
/// configuration error, 3 pipeline error.
int run_pipeline(const PipelineConfig& cfg);

/// Exit status for an error code.
int exit_status(Errc code) noexcept;

} // namespace reptex
